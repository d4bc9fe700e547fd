#include "trrom/cli.hpp"

int main(int argc, char** argv) { return trrom::cli_dispatch(argc, argv); }
