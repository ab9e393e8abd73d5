#include "slasel/cli.hpp"

int main(int argc, char** argv) { return slasel::cli::run(argc, argv); }
