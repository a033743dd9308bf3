#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "asyt/corpus.hpp"
#include "asyt/ctil.hpp"
#include "asyt/social_graph.hpp"
#include "asyt/types.hpp"

namespace asyt {

enum class ScoreTransform { Identity, Log1p };

struct EngineConfig {
  std::size_t k = 10;
  double alpha = 0.0;     // weight of the textual component
  double tf_scale = 1.0;  // multiplier on tf inside the blend
  ProximityAggregator aggregator;
  ScoreTransform transform = ScoreTransform::Identity;
  // nullopt runs to termination.
  std::optional<std::chrono::microseconds> time_budget = std::chrono::milliseconds(50);
  std::optional<std::size_t> max_visited_users;
};

// Throws std::invalid_argument on k == 0, alpha outside [0,1] or a
// non-positive tf_scale.
void validate(const EngineConfig& config);

double apply_transform(ScoreTransform h, double x) noexcept;

struct Query {
  std::vector<std::string> completed_terms;
  std::string active_prefix;
};

struct ScoreRange {
  double min = 0.0;
  double max = 0.0;
  bool closed() const noexcept { return min == max; }
};

enum class EntryStatus { Guaranteed, Possible };

struct RankedItem {
  ItemId item;
  double min;
  double max;
  EntryStatus status;
};

struct TopKResult {
  std::vector<RankedItem> entries;
  bool exact = false;
  double elapsed_ms = 0.0;
  std::size_t visited_users = 0;
};

struct KeystrokeEvent {
  enum class Kind { AppendChar, NewTerm };
  Kind kind = Kind::AppendChar;
  std::string value;  // one scalar for AppendChar

  static KeystrokeEvent append(std::string_view scalar) { return {Kind::AppendChar, std::string(scalar)}; }
  static KeystrokeEvent new_term() { return {Kind::NewTerm, {}}; }
};

// Whitespace becomes NewTerm, every other scalar an AppendChar.
std::vector<KeystrokeEvent> events_for_text(std::string_view typed);

struct CandidateBounds {
  ItemId item;
  ScoreRange range;
};

enum class Branch { Social, Textual };

// Run state for one seeker. Holds candidate entries per query term, the
// memoized proximity order, and private list positions; reused across
// keystrokes.
class Session {
 public:
  Session(const Corpus& corpus, const CtIlIndex& index, const SimilarityGraph& graph,
          std::optional<UserId> seeker, EngineConfig config);
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;
  ~Session();

  // Discards all run state and starts over on `q`.
  void set_query(const Query& q);
  // State transition only; no exploration.
  void apply(const KeystrokeEvent& ev);
  // Main loop under the configured budget.
  TopKResult run();
  TopKResult keystroke(const KeystrokeEvent& ev) {
    apply(ev);
    return run();
  }

  // One loop iteration; nullopt when no branch can make progress.
  std::optional<Branch> step();
  std::optional<Branch> choose_branch() const;
  bool termination_met() const;
  TopKResult anytime_topk() const;

  ScoreRange score_bounds(ItemId item) const;
  ScoreRange wildcard_bounds() const;
  std::vector<CandidateBounds> candidate_bounds() const;

  Query query() const;
  std::optional<UserId> seeker() const noexcept { return seeker_; }
  const EngineConfig& config() const noexcept { return config_; }
  std::size_t visited_users() const noexcept { return visited_users_; }
  std::size_t num_candidates() const noexcept { return items_.size(); }
  // Proximity of the next user to be visited, 0 when the frontier is spent.
  Proximity max_proximity() const;
  // Completions of the active prefix met so far.
  std::vector<TagId> completions() const;

  // Called after every step.
  void set_observer(std::function<void(const Session&)> fn) { observer_ = std::move(fn); }

 private:
  struct TermEntry {
    double sf = 0.0;
    std::uint32_t visited = 0;
    TermFreq tf = 0;
    bool tf_known = false;
    bool present = false;
  };
  struct ItemState {
    std::vector<TermEntry> completed;                         // by completed-term index
    std::vector<std::pair<TagId, TermEntry>> completions;     // active-prefix completions
  };
  struct CompletedTerm {
    std::string text;
    std::optional<TagId> tag;
    std::uint32_t list_pos = 0;
    std::size_t social_pos = 0;
  };
  struct PrefixTerm {
    std::string text;
    std::optional<NodeId> node;
    std::unique_ptr<ListOverlay> overlay;
    std::optional<VirtualListCursor> cursor;
    std::size_t social_pos = 0;
    bool active() const noexcept { return !text.empty(); }
  };
  class ProximityStream;
  struct Sums {
    double sf_lo, sf_hi;
    double tf_lo, tf_hi;
  };

  void reset_prefix();
  void open_prefix_cursor();
  void drop_empty_items();
  ItemState& state_of(ItemId item);
  TermEntry& completion_entry(ItemState& s, TagId tag);
  void record_completed(std::size_t term, ItemId item, TermFreq tf);
  void record_completion(TagId tag, ItemId item, TermFreq tf);

  void social_step();
  void textual_step();
  void process_ctil();
  bool social_available() const;
  bool textual_available() const;
  std::size_t min_social_pos() const;

  Proximity proximity_at(std::size_t pos) const;
  TermFreq completed_head(std::size_t term) const;
  TermFreq prefix_head() const;
  double blend(double tf, double sf) const noexcept;
  Sums entry_sums(const TermEntry& e, TermFreq head, Proximity mp) const noexcept;
  ScoreRange item_range(const ItemState* s) const;

  std::optional<TopKResult> exact_result() const;

  const Corpus* corpus_;
  const CtIlIndex* index_;
  const SimilarityGraph* graph_;
  std::optional<UserId> seeker_;
  EngineConfig config_;

  std::vector<CompletedTerm> completed_;
  PrefixTerm prefix_;
  std::unordered_set<std::uint32_t> seen_completions_;
  std::unordered_map<ItemId, ItemState> items_;
  std::unique_ptr<ProximityStream> stream_;
  std::size_t visited_users_ = 0;
  std::size_t work_since_check_ = 0;
  std::function<void(const Session&)> observer_;
};

TopKResult execute(const Corpus& corpus, const CtIlIndex& index, const SimilarityGraph& graph,
                   std::optional<UserId> seeker, const Query& query, const EngineConfig& config);

}  // namespace asyt
