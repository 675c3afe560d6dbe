#include "dualview/cli/app.h"

#include <iostream>

int main(int argc, char** argv) { return dualview::cli::run(argc, argv, std::cout, std::cerr); }
