#include <iostream>

#include <affdim/cli.hpp>

int main(int argc, char** argv) { return affdim::main_entry(argc, argv, std::cout, std::cerr); }
