#include <gtest/gtest.h>

#include <sstream>

#include "asyt/synthetic.hpp"

using namespace asyt;

namespace {
std::string dump(const SyntheticData& d) {
  std::ostringstream out;
  write_triples(out, d.corpus);
  write_edges(out, d.graph, d.corpus);
  return out.str();
}
}  // namespace

TEST(Synthetic, SameSeedSameBytes) {
  SyntheticSpec spec;
  spec.n_triples = 5000;
  EXPECT_EQ(dump(generate_synthetic(spec)), dump(generate_synthetic(spec)));
  auto other = spec;
  other.seed = 2;
  EXPECT_NE(dump(generate_synthetic(spec)), dump(generate_synthetic(other)));
}

TEST(Synthetic, ZeroTriples) {
  SyntheticSpec spec;
  spec.n_triples = 0;
  auto d = generate_synthetic(spec);
  EXPECT_EQ(d.corpus.num_triples(), 0u);
}

TEST(Synthetic, InfeasibleSizesThrow) {
  SyntheticSpec spec;
  spec.n_users = 2;
  spec.n_items = 2;
  spec.n_tags = 2;
  spec.n_triples = 100;
  EXPECT_THROW(generate_synthetic(spec), std::invalid_argument);
}

TEST(Synthetic, TagPopularityFollowsZipf) {
  SyntheticSpec spec;
  spec.n_triples = 50000;
  auto d = generate_synthetic(spec);
  EXPECT_EQ(d.corpus.num_triples(), spec.n_triples);
  EXPECT_NEAR(zipf_slope(d.corpus), -spec.zipf_exponent, 0.2);
}

TEST(Synthetic, GraphWeightsInRange) {
  SyntheticSpec spec;
  spec.n_triples = 3000;
  auto d = generate_synthetic(spec);
  EXPECT_GT(d.graph.num_edges(), 0u);
  for (const auto& e : d.graph.edges()) {
    EXPECT_GT(e.weight, 0.0);
    EXPECT_LE(e.weight, 1.0);
  }
}
