#include "asyt/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "asyt/text.hpp"

namespace asyt {

std::uint32_t Interner::intern(std::string_view name) {
  if (auto it = ids_.find(name); it != ids_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> Interner::find(std::string_view name) const {
  if (auto it = ids_.find(name); it != ids_.end()) return it->second;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Corpus::Builder::Builder()
    : users_(std::make_shared<Interner>()),
      items_(std::make_shared<Interner>()),
      tags_(std::make_shared<Interner>()) {}

bool Corpus::Builder::add(std::string_view user, std::string_view item, std::string_view tag) {
  auto u = users_->intern(user);
  auto i = items_->intern(item);
  auto t = tags_->intern(tag);
  auto key = (static_cast<std::uint64_t>(u) << 32) | i;
  auto& tags = seen_[key];
  if (std::find(tags.begin(), tags.end(), t) != tags.end()) return false;
  tags.push_back(t);
  triples_.push_back({make_id<UserId>(u), make_id<ItemId>(i), make_id<TagId>(t)});
  return true;
}

void Corpus::Builder::set_cooccurrence(CooccurrenceTable table) {
  cooc_ = std::make_shared<const CooccurrenceTable>(std::move(table));
}

Corpus Corpus::Builder::build() && {
  Corpus c;
  c.users_ = std::move(users_);
  c.items_ = std::move(items_);
  c.tags_ = std::move(tags_);
  c.cooc_ = std::move(cooc_);
  c.triples_ = std::move(triples_);
  seen_.clear();
  c.finalize();
  return c;
}

Corpus::Corpus()
    : users_(std::make_shared<Interner>()),
      items_(std::make_shared<Interner>()),
      tags_(std::make_shared<Interner>()),
      pspace_offsets_(1, 0),
      posting_offsets_(1, 0) {}

void Corpus::finalize() {
  const std::size_t nu = users_->size();
  const std::size_t nt = tags_->size();

  pspace_offsets_.assign(nu + 1, 0);
  for (const auto& tr : triples_) ++pspace_offsets_[index(tr.user) + 1];
  for (std::size_t u = 0; u < nu; ++u) pspace_offsets_[u + 1] += pspace_offsets_[u];
  pspace_.assign(triples_.size(), PSpaceEntry{});
  {
    std::vector<std::uint32_t> fill(pspace_offsets_.begin(), pspace_offsets_.end() - 1);
    for (const auto& tr : triples_) pspace_[fill[index(tr.user)]++] = {tr.item, tr.tag};
  }

  // Triples are unique, so tf(t, i) is the multiplicity of (t, i).
  std::vector<std::vector<ItemId>> by_tag(nt);
  for (const auto& tr : triples_) by_tag[index(tr.tag)].push_back(tr.item);
  posting_offsets_.assign(nt + 1, 0);
  postings_.clear();
  vocab_.clear();
  for (std::size_t t = 0; t < nt; ++t) {
    auto& items = by_tag[t];
    std::sort(items.begin(), items.end());
    for (std::size_t a = 0; a < items.size();) {
      std::size_t b = a;
      while (b < items.size() && items[b] == items[a]) ++b;
      postings_.push_back({items[a], static_cast<TermFreq>(b - a)});
      a = b;
    }
    posting_offsets_[t + 1] = static_cast<std::uint32_t>(postings_.size());
    if (!items.empty()) vocab_.push_back(make_id<TagId>(t));
  }
}

std::span<const PSpaceEntry> Corpus::p_space(UserId user) const noexcept {
  auto u = index(user);
  if (u + 1 >= pspace_offsets_.size()) return {};
  return std::span<const PSpaceEntry>(pspace_).subspan(pspace_offsets_[u], pspace_offsets_[u + 1] - pspace_offsets_[u]);
}

std::span<const Posting> Corpus::postings(TagId tag) const noexcept {
  auto t = index(tag);
  if (t + 1 >= posting_offsets_.size()) return {};
  return std::span<const Posting>(postings_).subspan(posting_offsets_[t], posting_offsets_[t + 1] - posting_offsets_[t]);
}

TermFreq Corpus::tf(TagId tag, ItemId item) const noexcept {
  auto list = postings(tag);
  auto it = std::lower_bound(list.begin(), list.end(), item,
                             [](const Posting& p, ItemId i) { return p.item < i; });
  return (it != list.end() && it->item == item) ? it->tf : 0;
}

std::optional<UserId> Corpus::find_user(std::string_view name) const {
  if (auto id = users_->find(name)) return make_id<UserId>(*id);
  return std::nullopt;
}
std::optional<ItemId> Corpus::find_item(std::string_view name) const {
  if (auto id = items_->find(name)) return make_id<ItemId>(*id);
  return std::nullopt;
}
std::optional<TagId> Corpus::find_tag(std::string_view name) const {
  if (auto id = tags_->find(name)) return make_id<TagId>(*id);
  return std::nullopt;
}

Corpus Corpus::subset(const std::function<bool(const Triple&)>& keep) const {
  Corpus c;
  c.users_ = users_;
  c.items_ = items_;
  c.tags_ = tags_;
  c.cooc_ = cooc_;
  c.triples_.reserve(triples_.size());
  std::copy_if(triples_.begin(), triples_.end(), std::back_inserter(c.triples_), keep);
  c.finalize();
  return c;
}

// ---------------------------------------------------------------------------

IngestResult ingest_triples(std::istream& in, std::optional<CooccurrenceTable> cooc) {
  Corpus::Builder builder;
  std::vector<Diagnostic> diags;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (text::trim(view).empty() || view.front() == '#') continue;
    auto fields = text::split(view, '\t');
    if (fields.size() != 3) {
      diags.push_back({lineno, fmt::format("expected 3 tab-separated fields, got {}", fields.size())});
      continue;
    }
    auto user = text::trim(fields[0]);
    auto item = text::trim(fields[1]);
    if (user.empty() || item.empty()) {
      diags.push_back({lineno, "empty user or item"});
      continue;
    }
    auto tag = text::normalize_tag(fields[2]);
    if (!tag) {
      diags.push_back({lineno, "empty tag or tag with inner whitespace"});
      continue;
    }
    builder.add(user, item, *tag);
  }
  if (cooc) builder.set_cooccurrence(std::move(*cooc));
  return {std::move(builder).build(), std::move(diags)};
}

IngestResult load_triples_file(const std::filesystem::path& path, std::optional<CooccurrenceTable> cooc) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open triples file '{}'", path.string()));
  return ingest_triples(in, std::move(cooc));
}

CooccurrenceTable read_cooccurrence(std::istream& in, std::vector<Diagnostic>* diagnostics) {
  CooccurrenceTable table;
  std::string line;
  std::size_t lineno = 0;
  auto report = [&](std::string msg) {
    if (diagnostics) diagnostics->push_back({lineno, std::move(msg)});
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (text::trim(view).empty() || view.front() == '#') continue;
    auto fields = text::split(view, '\t');
    if (fields.size() != 3) {
      report("expected tag<TAB>keyword<TAB>count");
      continue;
    }
    auto tag = text::normalize_tag(fields[0]);
    auto kw = text::normalize_tag(fields[1]);
    auto count_text = text::trim(fields[2]);
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (!tag || !kw || ec != std::errc{} || ptr != count_text.data() + count_text.size()) {
      report("malformed co-occurrence line");
      continue;
    }
    table[*tag][*kw] += count;
  }
  return table;
}

Corpus filter_corpus(const Corpus& c, std::size_t min_users_per_item, std::size_t min_items_per_user) {
  std::vector<bool> alive(c.num_triples(), true);
  auto triples = c.triples();
  bool changed = true;
  while (changed) {
    changed = false;
    // Distinct users per item and distinct items per user among live triples.
    std::vector<std::vector<std::uint32_t>> item_users(c.num_items());
    std::vector<std::vector<std::uint32_t>> user_items(c.num_users());
    for (std::size_t k = 0; k < triples.size(); ++k) {
      if (!alive[k]) continue;
      item_users[index(triples[k].item)].push_back(index(triples[k].user));
      user_items[index(triples[k].user)].push_back(index(triples[k].item));
    }
    auto distinct = [](std::vector<std::uint32_t>& v) {
      std::sort(v.begin(), v.end());
      return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
    };
    std::vector<std::size_t> n_users(c.num_items()), n_items(c.num_users());
    for (std::size_t i = 0; i < item_users.size(); ++i) n_users[i] = distinct(item_users[i]);
    for (std::size_t u = 0; u < user_items.size(); ++u) n_items[u] = distinct(user_items[u]);
    for (std::size_t k = 0; k < triples.size(); ++k) {
      if (!alive[k]) continue;
      if (n_users[index(triples[k].item)] < min_users_per_item ||
          n_items[index(triples[k].user)] < min_items_per_user) {
        alive[k] = false;
        changed = true;
      }
    }
  }
  Corpus::Builder b;
  for (std::size_t k = 0; k < triples.size(); ++k) {
    if (!alive[k]) continue;
    const auto& tr = triples[k];
    b.add(c.user_name(tr.user), c.item_name(tr.item), c.tag_name(tr.tag));
  }
  if (c.cooccurrence()) b.set_cooccurrence(*c.cooccurrence());
  return std::move(b).build();
}

Corpus expand_tags(const Corpus& c, std::size_t max_keywords) {
  const CooccurrenceTable* table = c.cooccurrence();
  if (table == nullptr) return c.subset([](const Triple&) { return true; });

  // Top keywords per tag: count descending, then lexicographic.
  std::unordered_map<std::uint32_t, std::vector<std::string>> expansions;
  for (TagId t : c.vocab()) {
    auto it = table->find(c.tag_name(t));
    if (it == table->end()) continue;
    std::vector<std::pair<std::uint64_t, std::string>> ranked;
    for (const auto& [kw, count] : it->second) {
      if (kw != it->first && count > 0) ranked.emplace_back(count, kw);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (ranked.size() > max_keywords) ranked.resize(max_keywords);
    auto& out = expansions[index(t)];
    for (auto& [count, kw] : ranked) out.push_back(std::move(kw));
  }

  Corpus::Builder b;
  for (const auto& tr : c.triples()) {
    const auto& user = c.user_name(tr.user);
    const auto& item = c.item_name(tr.item);
    b.add(user, item, c.tag_name(tr.tag));
    if (auto it = expansions.find(index(tr.tag)); it != expansions.end()) {
      for (const auto& kw : it->second) b.add(user, item, kw);
    }
  }
  b.set_cooccurrence(*table);
  return std::move(b).build();
}

void write_triples(std::ostream& out, const Corpus& c) {
  for (const auto& tr : c.triples()) {
    out << c.user_name(tr.user) << '\t' << c.item_name(tr.item) << '\t' << c.tag_name(tr.tag) << '\n';
  }
}

}  // namespace asyt
