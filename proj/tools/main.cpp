#include "dagpost/cli.hpp"

int main(int argc, char** argv) { return dagpost::cli_main(argc, argv); }
