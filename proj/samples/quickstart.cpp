// Computes a few dimension intervals with the library API.

#include <cmath>
#include <iostream>
#include <vector>

#include <affdim/affdim.hpp>

int main(int argc, char** argv) {
  using namespace affdim;

  // Self-similar pair with ratios 1/2 and 1/4: the dimension is log(golden ratio)/log 2.
  const IfsSystem golden = build_self_similar({0.5, 0.25});
  DimensionOptions fine;
  fine.tolerance = 1e-6;
  const DimensionInterval g = affinity_dimension(golden, parse_subset("1,2"), fine);
  std::cout << "golden pair: [" << fmt17(g.lo) << ", " << fmt17(g.hi) << "] via " << g.method << "\n";

  // Positive gallery at beta = 5: the core triple sits at log 3 / log 5.
  const IfsSystem gallery = build_paper_family_51();
  const DimensionInterval core = affinity_dimension(gallery, parse_subset("1,2,3"));
  std::cout << "core triple: [" << fmt17(core.lo) << ", " << fmt17(core.hi) << "] target " << fmt17(std::log(3.0) / std::log(5.0)) << "\n";

  // A pressure enclosure at one exponent for a cofinite subset.
  const PressureBound p = truncate_with_tail(gallery, parse_subset("1,2+tail(5)"), 0.68, 10, 5);
  std::cout << "P(0.68) for 1,2+tail(5): [" << fmt17(p.lower) << ", " << fmt17(p.upper) << "]\n";

  // Any system description on disk.
  if (argc > 1) {
    const IfsSystem sys = load_system(argv[1]);
    std::vector<Index> all;
    for (const auto& m : sys.explicit_maps()) all.push_back(m.index);
    DimensionOptions coarse;
    coarse.enumeration.budget = 1e6;
    const DimensionInterval d = affinity_dimension(sys, SubsetSpec::finite(all), coarse);
    std::cout << argv[1] << ": [" << fmt17(d.lo) << ", " << fmt17(d.hi) << "] certified=" << d.certified << "\n";
  }
  return 0;
}
