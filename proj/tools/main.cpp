#include "hviheat/cli.hpp"

int main(int argc, char** argv) { return hviheat::cli::run(argc, argv); }
