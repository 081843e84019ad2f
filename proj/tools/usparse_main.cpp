#include "usparse/commands.hpp"

int main(int argc, char** argv) { return usparse::run_cli(argc, argv); }
