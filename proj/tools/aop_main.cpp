#include "aop/cli.hpp"

int main(int argc, char** argv) { return aop::cli::run(argc, argv); }
