#include "stratpol/cli.hpp"

int main(int argc, char** argv) { return stratpol::run_command(argc, argv); }
