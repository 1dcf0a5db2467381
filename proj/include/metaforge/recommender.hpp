#pragma once

#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace metaforge {

using Rational = boost::multiprecision::cpp_rational;

struct ContextPair {
  std::string path;
  std::string valueKey;
  bool operator==(const ContextPair&) const = default;
};

/// Builds the match key for a raw context value. With the template at hand
/// the field type decides: term values are IRIs taken verbatim, numbers are
/// canonicalized, text is trimmed and casefolded. Without it, absolute IRIs
/// are kept verbatim and anything else is treated as text.
ContextPair context_pair(const Template* tree, const std::string& path, const std::string& value);

struct Suggestion {
  std::string valueKey;
  std::string display;
  Rational score;
  std::uint64_t supportCount = 0;
  bool operator==(const Suggestion&) const = default;
};

/// Value co-occurrence counts over the instances of one template. Within
/// an instance, repeated identical (path, valueKey) occurrences count once.
class CorpusIndex {
 public:
  using Item = std::pair<std::string, std::string>;  // (path, valueKey)

  explicit CorpusIndex(ResourceId templateId) : templateId_(std::move(templateId)) {}

  /// Throws TEMPLATE_MISMATCH.
  void add(const MetadataInstance& m);

  const ResourceId& templateId() const { return templateId_; }
  std::uint64_t n() const { return n_; }
  std::uint64_t unary(const Item& item) const;
  std::uint64_t pairwise(const Item& a, const Item& b) const;
  const std::string& display(const Item& item) const;
  const std::map<Item, std::uint64_t>& unary_counts() const { return unary_; }
  const std::map<std::pair<Item, Item>, std::uint64_t>& pairwise_counts() const { return pairwise_; }
  /// Value keys observed at a path.
  std::vector<std::string> candidates(const std::string& path) const;

  bool operator==(const CorpusIndex&) const = default;

 private:
  ResourceId templateId_;
  std::uint64_t n_ = 0;
  std::map<Item, std::uint64_t> unary_;
  std::map<std::pair<Item, Item>, std::uint64_t> pairwise_;  // first < second
  std::map<Item, std::string> display_;
  std::map<std::string, std::vector<std::string>> by_path_;  // sorted value keys
};

CorpusIndex index_corpus(const ResourceId& templateId, const std::vector<MetadataInstance>& instances);

/// Top-k values for targetPath: averaged conditional frequency over the
/// context pairs seen in the corpus, or marginal frequency when none are.
/// Sorted by (score desc, supportCount desc, valueKey asc). Throws
/// INVALID_ARGUMENT when k is 0 or a context path equals targetPath.
std::vector<Suggestion> suggest(const CorpusIndex& idx, const std::string& targetPath,
                                const std::vector<ContextPair>& context, std::size_t k, std::uint64_t minSupport = 1);

/// [{"value", "display", "score", "scoreExact", "supportCount"}]
Json suggestions_to_json(const std::vector<Suggestion>& suggestions);
std::string rational_text(const Rational& r);

/// Per-template indexes shared between request threads. Readers take a
/// shared lock; ingestion is exclusive.
class LiveIndex {
 public:
  void add(const MetadataInstance& m);
  void reset(const ResourceId& templateId, const std::vector<MetadataInstance>& instances);
  std::vector<Suggestion> suggest(const ResourceId& templateId, const std::string& targetPath,
                                  const std::vector<ContextPair>& context, std::size_t k,
                                  std::uint64_t minSupport = 1) const;
  std::uint64_t size(const ResourceId& templateId) const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<ResourceId, CorpusIndex> indexes_;
};

}  // namespace metaforge
