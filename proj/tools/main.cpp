#include "roadbeh/cli.hpp"

int main(int argc, char** argv) { return roadbeh::run_cli(argc, argv); }
