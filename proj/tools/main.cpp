#include "emsx/cli.hpp"

int main(int argc, char** argv) { return emsx::run_cli(argc, argv); }
