#include "metaforge/recommender.hpp"

#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <set>

namespace metaforge {

ContextPair context_pair(const Template* tree, const std::string& path, const std::string& value) {
  if (tree != nullptr) {
    if (const FieldSpec* f = find_field(*tree, path)) {
      switch (f->fieldType) {
        case FieldType::term: return {path, value};
        case FieldType::number: {
          const std::string text = trim(value);
          if (Decimal::parse(text)) return {path, canonical_decimal(std::strtod(text.c_str(), nullptr))};
          return {path, normalize_text_key(value)};
        }
        default: return {path, normalize_text_key(value)};
      }
    }
  }
  if (is_absolute_iri(value)) return {path, value};
  return {path, normalize_text_key(value)};
}

void CorpusIndex::add(const MetadataInstance& m) {
  if (m.templateId != templateId_)
    throw Error(errc::template_mismatch, "instance of " + m.templateId.str() + " in the index of " + templateId_.str());
  std::set<Item> items;
  for (auto& pair : flatten_instance(m)) {
    Item item{pair.path, pair.valueKey};
    display_[item] = std::move(pair.display);
    items.insert(std::move(item));
  }
  ++n_;
  for (const auto& item : items) {
    if (++unary_[item] == 1) {
      auto& keys = by_path_[item.first];
      keys.insert(std::lower_bound(keys.begin(), keys.end(), item.second), item.second);
    }
  }
  for (auto a = items.begin(); a != items.end(); ++a)
    for (auto b = std::next(a); b != items.end(); ++b) ++pairwise_[{*a, *b}];
}

std::uint64_t CorpusIndex::unary(const Item& item) const {
  auto it = unary_.find(item);
  return it == unary_.end() ? 0 : it->second;
}

std::uint64_t CorpusIndex::pairwise(const Item& a, const Item& b) const {
  if (a == b) return 0;
  auto it = a < b ? pairwise_.find({a, b}) : pairwise_.find({b, a});
  return it == pairwise_.end() ? 0 : it->second;
}

const std::string& CorpusIndex::display(const Item& item) const {
  static const std::string empty;
  auto it = display_.find(item);
  return it == display_.end() ? empty : it->second;
}

std::vector<std::string> CorpusIndex::candidates(const std::string& path) const {
  auto it = by_path_.find(path);
  return it == by_path_.end() ? std::vector<std::string>{} : it->second;
}

CorpusIndex index_corpus(const ResourceId& templateId, const std::vector<MetadataInstance>& instances) {
  CorpusIndex idx(templateId);
  for (const auto& m : instances) idx.add(m);
  return idx;
}

std::vector<Suggestion> suggest(const CorpusIndex& idx, const std::string& targetPath,
                                const std::vector<ContextPair>& context, std::size_t k, std::uint64_t minSupport) {
  if (k == 0) throw Error(errc::invalid_argument, "k must be positive");
  std::vector<CorpusIndex::Item> seen;
  for (const auto& c : context) {
    if (c.path == targetPath) throw Error(errc::invalid_argument, "context repeats the target path " + targetPath);
    CorpusIndex::Item item{c.path, c.valueKey};
    // A context pair listed twice is one observation.
    if (idx.unary(item) > 0 && std::find(seen.begin(), seen.end(), item) == seen.end()) seen.push_back(std::move(item));
  }
  if (idx.n() == 0) return {};

  std::vector<Suggestion> out;
  for (const auto& key : idx.candidates(targetPath)) {
    const CorpusIndex::Item target{targetPath, key};
    Suggestion s{key, idx.display(target), Rational(0), idx.unary(target)};
    if (s.supportCount < minSupport) continue;
    if (seen.empty()) {
      s.score = Rational(s.supportCount, idx.n());
    } else {
      for (const auto& c : seen) s.score += Rational(idx.pairwise(c, target), idx.unary(c));
      s.score /= static_cast<std::uint64_t>(seen.size());
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.supportCount != b.supportCount) return a.supportCount > b.supportCount;
    return a.valueKey < b.valueKey;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::string rational_text(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Json suggestions_to_json(const std::vector<Suggestion>& suggestions) {
  Json out = Json::array();
  for (const auto& s : suggestions) {
    Json item = Json::object();
    item["value"] = s.valueKey;
    item["display"] = s.display;
    item["score"] = number_json(s.score.convert_to<double>());
    item["scoreExact"] = rational_text(s.score);
    item["supportCount"] = s.supportCount;
    out.push_back(std::move(item));
  }
  return out;
}

void LiveIndex::add(const MetadataInstance& m) {
  std::unique_lock lock(mutex_);
  indexes_.try_emplace(m.templateId, m.templateId).first->second.add(m);
}

void LiveIndex::reset(const ResourceId& templateId, const std::vector<MetadataInstance>& instances) {
  CorpusIndex fresh = index_corpus(templateId, instances);
  std::unique_lock lock(mutex_);
  indexes_.insert_or_assign(templateId, std::move(fresh));
}

std::vector<Suggestion> LiveIndex::suggest(const ResourceId& templateId, const std::string& targetPath,
                                           const std::vector<ContextPair>& context, std::size_t k,
                                           std::uint64_t minSupport) const {
  std::shared_lock lock(mutex_);
  auto it = indexes_.find(templateId);
  if (it == indexes_.end()) return metaforge::suggest(CorpusIndex(templateId), targetPath, context, k, minSupport);
  return metaforge::suggest(it->second, targetPath, context, k, minSupport);
}

std::uint64_t LiveIndex::size(const ResourceId& templateId) const {
  std::shared_lock lock(mutex_);
  auto it = indexes_.find(templateId);
  return it == indexes_.end() ? 0 : it->second.n();
}

}  // namespace metaforge
