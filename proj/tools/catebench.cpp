#include "commands.hpp"

int main(int argc, char** argv) { return cate::cli::run_cli(argc, argv); }
