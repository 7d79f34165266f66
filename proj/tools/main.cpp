#include <iostream>

#include "coaforge/cli.hpp"

int main(int argc, char** argv)
{
    return coaforge::run_cli(argc, argv, std::cout, std::cerr);
}
