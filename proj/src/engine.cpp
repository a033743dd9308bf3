#include "asyt/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "asyt/text.hpp"

namespace asyt {

void validate(const EngineConfig& config) {
  if (config.k == 0) throw std::invalid_argument("k must be at least 1");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0,1]");
  if (!(config.tf_scale > 0.0) || !std::isfinite(config.tf_scale)) throw std::invalid_argument("tf_scale must be positive");
  if (config.aggregator.kind == ProximityAggregator::Kind::ExpDecay &&
      (!(config.aggregator.decay > 0.0) || config.aggregator.decay > 1.0)) {
    throw std::invalid_argument("decay factor must lie in (0,1]");
  }
}

double apply_transform(ScoreTransform h, double x) noexcept {
  return h == ScoreTransform::Log1p ? std::log1p(x) : x;
}

namespace {
std::string fold_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}
bool is_space(std::string_view scalar) {
  return scalar.size() == 1 && (scalar[0] == ' ' || scalar[0] == '\t' || scalar[0] == '\n' || scalar[0] == '\r');
}
}  // namespace

std::vector<KeystrokeEvent> events_for_text(std::string_view typed) {
  std::vector<KeystrokeEvent> out;
  for (const auto& s : text::scalars(typed)) {
    out.push_back(is_space(s) ? KeystrokeEvent::new_term() : KeystrokeEvent::append(s));
  }
  return out;
}

// Visit order of the seeker's network, replayable from any position.
class Session::ProximityStream {
 public:
  ProximityStream(const SimilarityGraph& g, std::optional<UserId> seeker, ProximityAggregator agg) {
    if (seeker && g.contains(*seeker)) it_.emplace(g, *seeker, agg);
  }
  std::optional<ProximityEntry> at(std::size_t pos) {
    while (seq_.size() <= pos && it_) {
      auto e = it_->next();
      if (!e) {
        it_.reset();
        break;
      }
      assert(seq_.empty() || seq_.back().proximity >= e->proximity);
      seq_.push_back(*e);
    }
    if (pos < seq_.size()) return seq_[pos];
    return std::nullopt;
  }

 private:
  std::vector<ProximityEntry> seq_;
  std::optional<ProximityIterator> it_;
};

Session::Session(const Corpus& corpus, const CtIlIndex& index, const SimilarityGraph& graph,
                 std::optional<UserId> seeker, EngineConfig config)
    : corpus_(&corpus), index_(&index), graph_(&graph), seeker_(seeker), config_(config) {
  validate(config_);
  stream_ = std::make_unique<ProximityStream>(graph, seeker, config_.aggregator);
  reset_prefix();
}

Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;
Session::~Session() = default;

void Session::reset_prefix() {
  prefix_.text.clear();
  prefix_.node.reset();
  prefix_.cursor.reset();
  prefix_.overlay = std::make_unique<ListOverlay>(*index_);
  prefix_.social_pos = 0;
  seen_completions_.clear();
}

void Session::open_prefix_cursor() {
  prefix_.cursor.reset();
  prefix_.node = prefix_.text.empty() ? std::nullopt : index_->find_prefix(prefix_.text);
  if (prefix_.node) prefix_.cursor.emplace(VirtualListCursor::open_node(*prefix_.overlay, *prefix_.node));
}

void Session::set_query(const Query& q) {
  completed_.clear();
  items_.clear();
  visited_users_ = 0;
  work_since_check_ = 0;
  for (const auto& raw : q.completed_terms) {
    auto term = fold_ascii(raw);
    if (term.empty()) continue;
    bool dup = std::any_of(completed_.begin(), completed_.end(), [&](const CompletedTerm& t) { return t.text == term; });
    if (dup) continue;
    CompletedTerm t;
    t.text = term;
    t.tag = corpus_->find_tag(term);
    completed_.push_back(std::move(t));
  }
  reset_prefix();
  prefix_.text = fold_ascii(q.active_prefix);
  open_prefix_cursor();
}

Query Session::query() const {
  Query q;
  for (const auto& t : completed_) q.completed_terms.push_back(t.text);
  q.active_prefix = prefix_.text;
  return q;
}

void Session::apply(const KeystrokeEvent& ev) {
  work_since_check_ = items_.size();  // force a check on the next run
  if (ev.kind == KeystrokeEvent::Kind::AppendChar) {
    if (ev.value.empty()) throw std::invalid_argument("empty character");
    prefix_.text += fold_ascii(ev.value);
    open_prefix_cursor();
    // Keep only completions of the longer prefix.
    for (auto& [item, s] : items_) {
      std::erase_if(s.completions, [&](const auto& c) {
        return !prefix_.node || !index_->is_completion(c.first, *prefix_.node);
      });
    }
    std::erase_if(seen_completions_, [&](std::uint32_t t) {
      return !prefix_.node || !index_->is_completion(make_id<TagId>(t), *prefix_.node);
    });
    drop_empty_items();
    return;
  }

  if (!prefix_.active()) {
    visited_users_ = 0;
    return;
  }
  const std::string frozen = prefix_.text;
  const bool dup = std::any_of(completed_.begin(), completed_.end(), [&](const CompletedTerm& t) { return t.text == frozen; });
  if (!dup) {
    CompletedTerm t;
    t.text = frozen;
    t.tag = corpus_->find_tag(frozen);
    if (t.tag) t.list_pos = prefix_.overlay->position(*t.tag);
    t.social_pos = prefix_.social_pos;
    completed_.push_back(std::move(t));
    const auto& added = completed_.back();
    for (auto& [item, s] : items_) {
      s.completed.resize(completed_.size());
      if (!added.tag) continue;
      for (const auto& [tag, e] : s.completions) {
        if (tag == *added.tag) s.completed.back() = e;
      }
    }
  }
  for (auto& [item, s] : items_) s.completions.clear();
  drop_empty_items();
  reset_prefix();
  visited_users_ = 0;
}

void Session::drop_empty_items() {
  std::erase_if(items_, [](const auto& kv) {
    const auto& s = kv.second;
    if (!s.completions.empty()) return false;
    return std::none_of(s.completed.begin(), s.completed.end(), [](const TermEntry& e) { return e.present; });
  });
}

Session::ItemState& Session::state_of(ItemId item) {
  auto& s = items_[item];
  if (s.completed.size() < completed_.size()) s.completed.resize(completed_.size());
  return s;
}

Session::TermEntry& Session::completion_entry(ItemState& s, TagId tag) {
  for (auto& [t, e] : s.completions) {
    if (t == tag) return e;
  }
  seen_completions_.insert(index(tag));
  s.completions.emplace_back(tag, TermEntry{});
  auto& e = s.completions.back().second;
  e.present = true;
  return e;
}

void Session::record_completed(std::size_t term, ItemId item, TermFreq tf) {
  auto& e = state_of(item).completed[term];
  e.present = true;
  e.tf = tf;
  e.tf_known = true;
}

void Session::record_completion(TagId tag, ItemId item, TermFreq tf) {
  auto& e = completion_entry(state_of(item), tag);
  e.tf = tf;
  e.tf_known = true;
}

// ---------------------------------------------------------------------------

Proximity Session::proximity_at(std::size_t pos) const {
  auto e = stream_->at(pos);
  return e ? e->proximity : 0.0;
}

std::size_t Session::min_social_pos() const {
  std::size_t m = static_cast<std::size_t>(-1);
  for (const auto& t : completed_) m = std::min(m, t.social_pos);
  if (prefix_.active()) m = std::min(m, prefix_.social_pos);
  return m;
}

Proximity Session::max_proximity() const {
  auto m = min_social_pos();
  return m == static_cast<std::size_t>(-1) ? 0.0 : proximity_at(m);
}

std::vector<TagId> Session::completions() const {
  std::vector<TagId> out;
  for (auto t : seen_completions_) out.push_back(make_id<TagId>(t));
  std::sort(out.begin(), out.end());
  return out;
}

TermFreq Session::completed_head(std::size_t term) const {
  const auto& t = completed_[term];
  if (!t.tag) return 0;
  auto l = index_->list(*t.tag);
  return t.list_pos < l.size() ? l[t.list_pos].tf : 0;
}

TermFreq Session::prefix_head() const { return prefix_.cursor ? prefix_.cursor->top_tf() : 0; }

bool Session::social_available() const {
  auto m = min_social_pos();
  return m != static_cast<std::size_t>(-1) && stream_->at(m).has_value();
}

bool Session::textual_available() const {
  for (std::size_t j = 0; j < completed_.size(); ++j) {
    if (completed_head(j) > 0) return true;
  }
  return prefix_.active() && prefix_head() > 0;
}

void Session::social_step() {
  const std::size_t m = min_social_pos();
  auto visit = stream_->at(m);
  if (!visit) return;
  const Proximity p = visit->proximity;
  const bool prefix_here = prefix_.active() && prefix_.social_pos == m && prefix_.node.has_value();
  std::vector<std::size_t> here;
  for (std::size_t j = 0; j < completed_.size(); ++j) {
    if (completed_[j].social_pos == m && completed_[j].tag) here.push_back(j);
  }
  auto space = corpus_->p_space(visit->user);
  for (const auto& [item, tag] : space) {
    for (auto j : here) {
      if (*completed_[j].tag != tag) continue;
      auto& e = state_of(item).completed[j];
      e.present = true;
      e.sf += p;
      ++e.visited;
    }
    if (prefix_here && index_->is_completion(tag, *prefix_.node)) {
      auto& e = completion_entry(state_of(item), tag);
      e.sf += p;
      ++e.visited;
    }
  }
  for (auto& t : completed_) {
    if (t.social_pos == m) ++t.social_pos;
  }
  if (prefix_.active() && prefix_.social_pos == m) ++prefix_.social_pos;
  ++visited_users_;
  work_since_check_ += space.size() + 1;
  process_ctil();
}

// Consumes list heads that refer to known candidates.
void Session::process_ctil() {
  for (std::size_t j = 0; j < completed_.size(); ++j) {
    auto& t = completed_[j];
    if (!t.tag) continue;
    auto l = index_->list(*t.tag);
    while (t.list_pos < l.size() && items_.contains(l[t.list_pos].item)) {
      record_completed(j, l[t.list_pos].item, l[t.list_pos].tf);
      ++t.list_pos;
      ++work_since_check_;
    }
  }
  if (!prefix_.active() || !prefix_.cursor) return;
  std::vector<VirtualEntry> skipped;
  while (true) {
    auto head = prefix_.cursor->peek();
    if (!head || !items_.contains(head->item)) break;
    skipped.clear();
    prefix_.cursor->advance(&skipped);
    record_completion(head->tag, head->item, head->tf);
    for (const auto& s : skipped) record_completion(s.tag, s.item, s.tf);
    work_since_check_ += 1 + skipped.size();
  }
}

void Session::textual_step() {
  for (std::size_t j = 0; j < completed_.size(); ++j) {
    auto& t = completed_[j];
    if (!t.tag) continue;
    auto l = index_->list(*t.tag);
    if (t.list_pos >= l.size()) continue;
    record_completed(j, l[t.list_pos].item, l[t.list_pos].tf);
    ++t.list_pos;
    ++work_since_check_;
  }
  if (prefix_.active() && prefix_.cursor && !prefix_.cursor->exhausted()) {
    std::vector<VirtualEntry> skipped;
    auto head = prefix_.cursor->advance(&skipped);
    record_completion(head->tag, head->item, head->tf);
    for (const auto& s : skipped) record_completion(s.tag, s.item, s.tf);
    work_since_check_ += 1 + skipped.size();
  }
}

std::optional<Branch> Session::choose_branch() const {
  const bool social = seeker_.has_value() && config_.alpha < 1.0 && social_available();
  const bool textual = config_.alpha > 0.0 && textual_available();
  if (!social && !textual) return std::nullopt;
  if (!social) return Branch::Textual;
  if (!textual) return Branch::Social;
  double sum_top = 0.0;
  for (std::size_t j = 0; j < completed_.size(); ++j) sum_top += completed_head(j);
  if (prefix_.active()) sum_top += prefix_head();
  const double social_potential = (1.0 - config_.alpha) * max_proximity() * sum_top;
  const double textual_potential = config_.alpha * config_.tf_scale * sum_top;
  return social_potential >= textual_potential ? Branch::Social : Branch::Textual;
}

std::optional<Branch> Session::step() {
  auto branch = choose_branch();
  if (!branch) return std::nullopt;
  if (*branch == Branch::Social) {
    social_step();
  } else {
    textual_step();
  }
  if (observer_) observer_(*this);
  return branch;
}

TopKResult Session::run() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto finish = [&](TopKResult r) {
    r.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    r.visited_users = visited_users_;
    return r;
  };
  std::size_t iterations = 0;
  while (true) {
    const bool can_step = choose_branch().has_value();
    // Checks cost time linear in the candidate count; space them by work.
    if (!can_step || work_since_check_ >= items_.size()) {
      work_since_check_ = 0;
      if (auto r = exact_result()) return finish(std::move(*r));
      if (!can_step) break;
    }
    if (config_.max_visited_users && visited_users_ >= *config_.max_visited_users) break;
    if (config_.time_budget && ++iterations % 16 == 0 && clock::now() - start >= *config_.time_budget) break;
    step();
  }
  return finish(anytime_topk());
}

TopKResult execute(const Corpus& corpus, const CtIlIndex& index, const SimilarityGraph& graph,
                   std::optional<UserId> seeker, const Query& query, const EngineConfig& config) {
  Session s(corpus, index, graph, seeker, config);
  s.set_query(query);
  return s.run();
}

}  // namespace asyt
