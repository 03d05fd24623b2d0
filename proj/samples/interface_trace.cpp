// Traces one competition interface and writes it as CSV to stdout.
// usage: sample_interface_trace [n_steps] [seed]

#include <cstdlib>
#include <iostream>

#include "rarefan/lattice_lpp.hpp"

using namespace rarefan;

int main(int argc, char** argv) {
  const long n = argc > 1 ? std::atol(argv[1]) : 200;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  const TasepProfile eta = two_corner(1, 1);
  const WeightField X(seed);
  const InterfacePath p = competition_interface_trace(X, interface_sigma(eta, n), n);
  write_interface_csv(std::cout, p);
  std::cerr << "angle " << p.angle() << " after " << n << " steps\n";
}
