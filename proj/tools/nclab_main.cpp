#include "nc/cli.hpp"

int main(int argc, char** argv) { return nc::cli::dispatch(argc, argv); }
