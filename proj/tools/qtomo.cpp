#include "qtomo/harness.hpp"

int main(int argc, char** argv) { return qtomo::run_cli(argc, argv); }
