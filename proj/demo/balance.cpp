// Solves a scenario by all three routes and prints what each one finds.
//
//   demo_balance scenarios/e2.json

#include "sirbal/sirbal.hpp"

#include <cstdio>
#include <iostream>

using namespace sirbal;

static void print_vector(const char* label, const Vector& v) {
  std::printf("  %-14s", label);
  for (Eigen::Index k = 0; k < v.size(); ++k) std::printf(" %.9f", v[k]);
  std::printf("\n");
}

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " scenario.json\n";
    return 1;
  }
  try {
    const Scenario s = load_scenario(argv[1]);

    const MaxMinSolution sol = solve_maxmin(s.model, s.poly);
    std::printf("eigen route\n");
    print_vector("p_bar", sol.p_bar);
    print_vector("sir", sol.sir);
    print_vector("rho(B[n])", sol.rho_B);
    std::printf("  beta           %.9f\n  level          %.9f\n", sol.beta, sol.level);

    // The max-min weights make p_bar the utility optimum.
    const WeightVector w = maxmin_weights(s.model, s.poly);
    const AscentResult a = maximize_F(s.model, s.poly, s.utility, w);
    std::printf("utility route (%s)\n", s.utility.name().c_str());
    print_vector("weights", w.values());
    print_vector("p", a.p);
    std::printf("  iterations     %zu\n", a.iterations);

    SaddleConfig cfg;
    cfg.record_trace = false;
    const SaddleResult sr = saddle_solve(s.model, s.poly, s.utility, cfg, &sol.p_bar);
    std::printf("saddle route\n");
    print_vector("w", sr.w);
    print_vector("p", sr.p);
    std::printf("  iterations     %zu\n", sr.iterations);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
