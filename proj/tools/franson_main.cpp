#include <iostream>

#include "franson/app/commands.hpp"

int main(int argc, char** argv) { return franson::app::run_cli(argc, argv, std::cout, std::cerr); }
