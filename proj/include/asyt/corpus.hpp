#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "asyt/types.hpp"

namespace asyt {

// Bidirectional string <-> dense id map.
class Interner {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> ids_;
};

struct Triple {
  UserId user;
  ItemId item;
  TagId tag;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct PSpaceEntry {
  ItemId item;
  TagId tag;
};

// (item, tf) pair of an inverted list.
struct Posting {
  ItemId item;
  TermFreq tf;
  friend bool operator==(const Posting&, const Posting&) = default;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

// tag -> keyword -> co-occurrence count, keyed by normalized strings.
using CooccurrenceTable = std::map<std::string, std::map<std::string, std::uint64_t>, std::less<>>;

// Immutable set of unique tagging triples together with the derived views the
// engine reads: personal spaces (per-user (item, tag) sequences) and per-tag
// postings carrying tf(t, i) = number of distinct users with Tagged(u, i, t).
class Corpus {
 public:
  class Builder {
   public:
    Builder();
    // Returns false when the triple was already present.
    bool add(std::string_view user, std::string_view item, std::string_view tag);
    void set_cooccurrence(CooccurrenceTable table);
    Corpus build() &&;

   private:
    std::shared_ptr<Interner> users_, items_, tags_;
    std::vector<Triple> triples_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> seen_;  // (user,item) -> tags
    std::shared_ptr<const CooccurrenceTable> cooc_;
  };

  Corpus();

  std::size_t num_triples() const noexcept { return triples_.size(); }
  std::size_t num_users() const noexcept { return users_->size(); }
  std::size_t num_items() const noexcept { return items_->size(); }
  std::size_t num_tags() const noexcept { return tags_->size(); }

  std::span<const Triple> triples() const noexcept { return triples_; }

  // Empty for ids outside the user namespace.
  std::span<const PSpaceEntry> p_space(UserId user) const noexcept;

  // Items tagged with `tag`, ascending item id.
  std::span<const Posting> postings(TagId tag) const noexcept;

  TermFreq tf(TagId tag, ItemId item) const noexcept;

  // Tags carried by at least one triple, ascending id.
  const std::vector<TagId>& vocab() const noexcept { return vocab_; }

  const std::string& user_name(UserId u) const { return users_->name(index(u)); }
  const std::string& item_name(ItemId i) const { return items_->name(index(i)); }
  const std::string& tag_name(TagId t) const { return tags_->name(index(t)); }
  std::optional<UserId> find_user(std::string_view name) const;
  std::optional<ItemId> find_item(std::string_view name) const;
  std::optional<TagId> find_tag(std::string_view name) const;

  const Interner& users() const noexcept { return *users_; }
  const CooccurrenceTable* cooccurrence() const noexcept { return cooc_.get(); }

  // Same id namespaces, only the triples accepted by `keep`.
  Corpus subset(const std::function<bool(const Triple&)>& keep) const;

 private:
  friend class Builder;
  void finalize();

  std::shared_ptr<const Interner> users_, items_, tags_;
  std::shared_ptr<const CooccurrenceTable> cooc_;
  std::vector<Triple> triples_;
  std::vector<std::uint32_t> pspace_offsets_;
  std::vector<PSpaceEntry> pspace_;
  std::vector<std::uint32_t> posting_offsets_;
  std::vector<Posting> postings_;
  std::vector<TagId> vocab_;
};

struct IngestResult {
  Corpus corpus;
  std::vector<Diagnostic> diagnostics;
};

// Reads `user<TAB>item<TAB>tag` lines. Lines starting with '#' and blank lines
// are skipped; malformed lines produce a diagnostic and are dropped.
IngestResult ingest_triples(std::istream& in, std::optional<CooccurrenceTable> cooc = std::nullopt);
IngestResult load_triples_file(const std::filesystem::path& path,
                               std::optional<CooccurrenceTable> cooc = std::nullopt);

// Reads `tag<TAB>keyword<TAB>count` lines.
CooccurrenceTable read_cooccurrence(std::istream& in, std::vector<Diagnostic>* diagnostics = nullptr);

// Iteratively drops items tagged by fewer than `min_users_per_item` distinct
// users and users tagging fewer than `min_items_per_user` distinct items, until
// both hold. The result is re-interned.
Corpus filter_corpus(const Corpus& c, std::size_t min_users_per_item = 2, std::size_t min_items_per_user = 2);

// Adds (u, i, w) for the `max_keywords` keywords w that co-occur most with t,
// for every triple (u, i, t). Identity when the corpus has no table.
Corpus expand_tags(const Corpus& c, std::size_t max_keywords = 5);

void write_triples(std::ostream& out, const Corpus& c);

}  // namespace asyt
