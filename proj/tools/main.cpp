#include "cbmadv/cli.hpp"

int main(int argc, char** argv) { return cbmadv::cli_main(argc, argv); }
