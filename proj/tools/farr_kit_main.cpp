#include "farrkit/cli.hpp"

int main(int argc, char** argv) { return farrkit::run_cli(argc, argv); }
