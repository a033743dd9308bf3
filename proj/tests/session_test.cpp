#include <gtest/gtest.h>

#include <random>

#include "asyt/engine.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace asyt;
using asyt::testing::item;
using asyt::testing::user;

namespace {

EngineConfig unbounded(std::size_t k, double alpha) {
  EngineConfig cfg;
  cfg.k = k;
  cfg.alpha = alpha;
  cfg.time_budget.reset();
  return cfg;
}

void expect_same(const TopKResult& a, const TopKResult& b) {
  ASSERT_EQ(a.exact, b.exact);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t r = 0; r < a.entries.size(); ++r) {
    EXPECT_EQ(a.entries[r].item, b.entries[r].item) << "rank " << r;
    EXPECT_EQ(a.entries[r].min, b.entries[r].min) << "rank " << r;
    EXPECT_EQ(a.entries[r].max, b.entries[r].max) << "rank " << r;
  }
}

}  // namespace

TEST(Session, TypingMatchesBatchOnRunningExample) {
  auto d = asyt::testing::running_example();
  const auto alice = user(d.corpus, "Alice");
  Session s(d.corpus, d.index, d.graph, alice, unbounded(2, 0.0));
  TopKResult last;
  for (const auto& ev : events_for_text("style gl")) last = s.keystroke(ev);
  auto batch = execute(d.corpus, d.index, d.graph, alice, {{"style"}, "gl"}, unbounded(2, 0.0));
  expect_same(last, batch);
  ASSERT_FALSE(last.entries.empty());
  EXPECT_EQ(last.entries[0].item, item(d.corpus, "i6"));
  EXPECT_NEAR(last.entries[0].min, 2.4, 1e-9);
}

TEST(Session, EventsForText) {
  auto ev = events_for_text("style gl");
  ASSERT_EQ(ev.size(), 8u);
  EXPECT_EQ(ev[5].kind, KeystrokeEvent::Kind::NewTerm);
}

TEST(Session, NewTermResetsVisitCounter) {
  auto d = asyt::testing::running_example();
  Session s(d.corpus, d.index, d.graph, user(d.corpus, "Alice"), unbounded(2, 0.0));
  for (const auto& ev : events_for_text("style")) s.keystroke(ev);
  EXPECT_GT(s.visited_users(), 0u);
  s.apply(KeystrokeEvent::new_term());
  EXPECT_EQ(s.visited_users(), 0u);
  EXPECT_TRUE(s.query().active_prefix.empty());
  ASSERT_EQ(s.query().completed_terms.size(), 1u);
  auto r = s.run();
  auto batch = execute(d.corpus, d.index, d.graph, user(d.corpus, "Alice"), {{"style"}, ""}, unbounded(2, 0.0));
  expect_same(r, batch);
}

TEST(Session, DeadPrefixEmptiesCompletions) {
  auto d = asyt::testing::running_example();
  Session s(d.corpus, d.index, d.graph, user(d.corpus, "Alice"), unbounded(3, 0.0));
  s.keystroke(KeystrokeEvent::append("g"));
  EXPECT_FALSE(s.completions().empty());
  auto r = s.keystroke(KeystrokeEvent::append("x"));
  EXPECT_TRUE(s.completions().empty());
  EXPECT_TRUE(r.entries.empty());
  EXPECT_TRUE(r.exact);
}

TEST(Session, RandomSessionsMatchBatchAtEveryKeystroke) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto d = asyt::testing::random_dataset(4000 + seed);
    std::mt19937_64 rng(seed);
    const auto seeker = make_id<UserId>(rng() % d.corpus.num_users());
    const double alpha = std::array<double, 3>{0.0, 0.5, 1.0}[seed % 3];
    const auto cfg = unbounded(1 + seed % 7, alpha);
    Session s(d.corpus, d.index, d.graph, seeker, cfg);
    Query q;
    const int terms = 2 + static_cast<int>(rng() % 2);
    for (int t = 0; t < terms; ++t) {
      if (t > 0) {
        s.keystroke(KeystrokeEvent::new_term());
        q.completed_terms.push_back(q.active_prefix);
        q.active_prefix.clear();
      }
      // Mostly real tags so completions are non-trivial.
      auto word = d.corpus.tag_name(d.corpus.vocab()[rng() % d.corpus.vocab().size()]);
      word += asyt::testing::random_tag_name(rng);
      const std::size_t len = 3 + rng() % 6;
      for (std::size_t c = 0; c < len && c < word.size(); ++c) {
        auto got = s.keystroke(KeystrokeEvent::append(word.substr(c, 1)));
        q.active_prefix += word[c];
        auto want = execute(d.corpus, d.index, d.graph, seeker, q, cfg);
        SCOPED_TRACE(::testing::Message() << "seed " << seed << " prefix " << q.active_prefix);
        expect_same(got, want);
        auto truth = oracle::top_k(d.corpus, d.graph, seeker, q, cfg);
        ASSERT_EQ(got.entries.size(), truth.size());
      }
    }
  }
}
