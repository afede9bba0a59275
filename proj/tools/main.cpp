#include "cli.hpp"

int main(int argc, char** argv) { return lgnn::cli::run_cli(argc, argv); }
