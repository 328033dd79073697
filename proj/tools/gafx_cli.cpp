#include <iostream>

#include "gafx/app.hpp"

int main(int argc, char** argv) { return gafx::run_cli(argc, argv, std::cout, std::cerr); }
