#include <iostream>

#include "traje/cli.hpp"

int main(int argc, char** argv)
{
  return traje::cli::run(argc, argv, std::cout, std::cerr);
}
