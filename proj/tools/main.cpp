#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  const auto parsed = bcp::cli::parse_args(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  return bcp::cli::run(*parsed.config, std::cout, std::cerr);
}
