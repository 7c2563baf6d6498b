#include "omnibench/testgen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "omnibench/embedding.hpp"
#include "omnibench/error.hpp"

namespace omnibench::testgen {
namespace {

using Key = std::tuple<std::string, std::string, std::string>;  // relation, subject, object

Key key_of(const Triple& t) { return {t.relation, t.subject, t.object}; }

std::string read_text(const std::string& path, ErrorKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(kind, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Fact store with the two join indexes the rules need.
class FactStore {
 public:
  bool contains(const Key& k) const { return facts_.contains(k); }

  void insert(Triple t) {
    by_subject_[{t.relation, t.subject}].insert(t.object);
    by_object_[{t.relation, t.object}].insert(t.subject);
    facts_.emplace(key_of(t), std::move(t));
  }

  const std::set<std::string>& objects(const std::string& rel, const std::string& subj) const {
    const auto it = by_subject_.find({rel, subj});
    return it == by_subject_.end() ? empty_ : it->second;
  }
  const std::set<std::string>& subjects(const std::string& rel, const std::string& obj) const {
    const auto it = by_object_.find({rel, obj});
    return it == by_object_.end() ? empty_ : it->second;
  }

  std::vector<Triple> sorted() const {
    std::vector<Triple> out;
    out.reserve(facts_.size());
    for (const auto& [k, t] : facts_) out.push_back(t);
    return out;
  }

 private:
  std::map<Key, Triple> facts_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> by_subject_;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> by_object_;
  std::set<std::string> empty_;
};

}  // namespace

std::string fact_id(std::string_view subject, std::string_view relation, std::string_view object) {
  std::string joined;
  joined.reserve(subject.size() + relation.size() + object.size() + 2);
  joined.append(subject).push_back('\t');
  joined.append(relation).push_back('\t');
  joined.append(object);
  char buf[24];
  std::snprintf(buf, sizeof buf, "f%016llx",
                static_cast<unsigned long long>(embedding::fnv1a64(joined)));
  return buf;
}

std::string Triple::id() const { return fact_id(subject, relation, object); }

const RelationMeta* RuleSet::find(std::string_view relation) const {
  for (const auto& r : relations) {
    if (r.name == relation) return &r;
  }
  return nullptr;
}

void RuleSet::validate() const {
  std::set<std::string> names;
  for (const auto& r : relations) {
    if (r.name.empty()) fail(ErrorKind::Config, "relation with empty name");
    if (!names.insert(r.name).second) fail(ErrorKind::Config, "duplicate relation '" + r.name + "'");
  }
  for (const auto& r : relations) {
    for (const char* required : {"direct", "negation"}) {
      if (!r.templates.contains(required)) {
        fail(ErrorKind::Config, "relation '" + r.name + "' lacks a '" + required + "' template");
      }
    }
    for (const auto& [pattern, tmpl] : r.templates) {
      if (!parse_pattern(pattern)) {
        fail(ErrorKind::Config, "relation '" + r.name + "': unknown template pattern '" + pattern + "'");
      }
    }
    if (r.inverse_of) {
      const RelationMeta* other = find(*r.inverse_of);
      if (!other) {
        fail(ErrorKind::Config, "relation '" + r.name + "': inverse_of names unknown relation '" +
                                    *r.inverse_of + "'");
      }
      if (other->inverse_of != r.name) {
        fail(ErrorKind::Config, "inverse_of must be mutual: '" + r.name + "' -> '" + *r.inverse_of +
                                    "' but not back");
      }
    }
  }
  for (const auto& c : compositions) {
    for (const auto* name : {&c.first, &c.second, &c.result}) {
      if (!find(*name)) fail(ErrorKind::Config, "composition references unknown relation '" + *name + "'");
    }
  }
}

RuleSet parse_rules(std::string_view json_text, std::string_view origin) {
  const std::string where(origin);
  RuleSet rules;
  try {
    const auto root = nlohmann::json::parse(json_text);
    for (const auto& [key, value] : root.items()) {
      if (key != "relations" && key != "compositions") {
        fail(ErrorKind::Config, where + ": unknown key '" + key + "'");
      }
    }
    for (const auto& r : root.at("relations")) {
      RelationMeta meta;
      meta.name = r.at("name").get<std::string>();
      meta.symmetric = r.value("symmetric", false);
      meta.transitive = r.value("transitive", false);
      if (r.contains("inverse_of") && !r["inverse_of"].is_null()) {
        meta.inverse_of = r["inverse_of"].get<std::string>();
      }
      meta.templates = r.value("templates", std::map<std::string, std::string>{});
      rules.relations.push_back(std::move(meta));
    }
    if (root.contains("compositions")) {
      for (const auto& c : root["compositions"]) {
        rules.compositions.push_back({c.at("first").get<std::string>(), c.at("second").get<std::string>(),
                                      c.at("result").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, where + ": " + e.what());
  }
  rules.validate();
  return rules;
}

RuleSet load_rules(const std::string& path) { return parse_rules(read_text(path, ErrorKind::Config), path); }

LoadResult parse_triples(std::string_view tsv, const RuleSet& rules, std::string_view origin) {
  const std::string where(origin);
  LoadResult result;
  std::set<Key> seen;
  std::set<std::string> unknown;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    const std::size_t nl = tsv.find('\n', pos);
    std::string_view line = tsv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? tsv.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    const std::string at = where + ":" + std::to_string(line_no);
    if (fields.size() < 3 || fields.size() > 4) {
      fail(ErrorKind::Ingestion, at + ": expected 3 or 4 tab-separated fields, got " + std::to_string(fields.size()));
    }
    static constexpr const char* kSlot[] = {"subject", "relation", "object"};
    for (int i = 0; i < 3; ++i) {
      if (fields[i].empty()) fail(ErrorKind::Ingestion, at + ": empty " + kSlot[i]);
    }
    Triple t{fields[0], fields[1], fields[2], {fields.size() == 4 ? fields[3] : where, "", {}}};
    if (!rules.find(t.relation)) {
      unknown.insert(t.relation);
      continue;
    }
    if (!seen.insert(key_of(t)).second) {
      ++result.duplicates_dropped;
      continue;
    }
    result.triples.push_back(std::move(t));
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    fail(ErrorKind::Ingestion, where + ": relations missing from relation metadata: " + list);
  }
  return result;
}

LoadResult load_triples(const std::string& path, const RuleSet& rules) {
  return parse_triples(read_text(path, ErrorKind::Ingestion), rules, path);
}

std::string_view to_string(Rule rule) noexcept {
  switch (rule) {
    case Rule::Symmetric: return "symmetric";
    case Rule::Inverse: return "inverse";
    case Rule::Transitive: return "transitive";
    case Rule::Composite: return "composite";
  }
  return "?";
}

std::vector<Triple> derive(const std::vector<Triple>& facts, const RuleSet& rules,
                           const DeriveOptions& options) {
  if (options.max_depth == 0) fail(ErrorKind::Config, "max_depth must be positive");
  for (const auto& f : facts) {
    if (!rules.find(f.relation)) fail(ErrorKind::Config, "no relation metadata for '" + f.relation + "'");
  }

  const bool use_symmetric = options.rules.contains(Rule::Symmetric);
  const bool use_transitive = options.rules.contains(Rule::Transitive);
  const bool use_composite = options.rules.contains(Rule::Composite);
  std::map<std::string, std::string> inverse_of;
  if (options.rules.contains(Rule::Inverse)) {
    if (options.inverse_relations.empty()) {
      for (const auto& r : rules.relations) {
        if (r.inverse_of) inverse_of[r.name] = *r.inverse_of;
      }
    }
    for (const auto& name : options.inverse_relations) {
      const RelationMeta* r = rules.find(name);
      if (!r) fail(ErrorKind::Config, "inverse rule requested for unknown relation '" + name + "'");
      if (!r->inverse_of) fail(ErrorKind::Config, "inverse rule requested for '" + name + "', which has no inverse_of");
      inverse_of[name] = *r->inverse_of;
    }
  }

  FactStore store;
  std::vector<Key> delta;
  for (const auto& f : facts) {
    if (store.contains(key_of(f))) continue;
    store.insert(f);
    delta.push_back(key_of(f));
  }
  std::sort(delta.begin(), delta.end());

  for (std::size_t depth = 0; depth < options.max_depth && !delta.empty(); ++depth) {
    std::map<Key, Triple> fresh;
    const auto emit = [&](std::string s, const std::string& r, std::string o, Rule rule,
                          std::vector<std::string> parents) {
      Key k{r, s, o};
      if (store.contains(k) || fresh.contains(k)) return;
      fresh.emplace(std::move(k), Triple{std::move(s), r, std::move(o),
                                         {"derived", std::string(to_string(rule)), std::move(parents)}});
    };

    for (const auto& [r, s, o] : delta) {
      const std::string self = fact_id(s, r, o);
      const RelationMeta& meta = *rules.find(r);
      if (use_symmetric && meta.symmetric) emit(o, r, s, Rule::Symmetric, {self});
      if (const auto inv = inverse_of.find(r); inv != inverse_of.end()) {
        emit(o, inv->second, s, Rule::Inverse, {self});
      }
      if (use_transitive && meta.transitive) {
        for (const auto& t : store.objects(r, o)) emit(s, r, t, Rule::Transitive, {self, fact_id(o, r, t)});
        for (const auto& x : store.subjects(r, s)) emit(x, r, o, Rule::Transitive, {fact_id(x, r, s), self});
      }
      if (use_composite) {
        for (const auto& c : rules.compositions) {
          if (c.first == r) {
            for (const auto& t : store.objects(c.second, o)) {
              emit(s, c.result, t, Rule::Composite, {self, fact_id(o, c.second, t)});
            }
          }
          if (c.second == r) {
            for (const auto& x : store.subjects(c.first, s)) {
              emit(x, c.result, o, Rule::Composite, {fact_id(x, c.first, s), self});
            }
          }
        }
      }
    }

    delta.clear();
    for (auto& [k, t] : fresh) {
      delta.push_back(k);
      store.insert(std::move(t));
    }
  }
  return store.sorted();
}

std::string_view to_string(Pattern p) noexcept {
  switch (p) {
    case Pattern::Direct: return "direct";
    case Pattern::Negation: return "negation";
    case Pattern::Inverse: return "inverse";
    case Pattern::Symmetric: return "symmetric";
    case Pattern::Transitive: return "transitive";
    case Pattern::Composite: return "composite";
  }
  return "?";
}

std::optional<Pattern> parse_pattern(std::string_view name) {
  const std::string n = lower(name);
  for (Pattern p : kAllPatterns) {
    if (to_string(p) == n) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Answer a) noexcept { return a == Answer::Yes ? "Yes" : "No"; }

std::optional<Answer> parse_answer(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "yes") return Answer::Yes;
  if (t == "no") return Answer::No;
  return std::nullopt;
}

std::string render(std::string_view tmpl, std::string_view subject, std::string_view object) {
  std::string out;
  out.reserve(tmpl.size() + subject.size() + object.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl.substr(i, 3) == "{s}") {
      out.append(subject);
      i += 2;
    } else if (tmpl.substr(i, 3) == "{o}") {
      out.append(object);
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

std::vector<QAItem> generate_qa(const std::vector<Triple>& facts, const RuleSet& rules,
                                const GenerateOptions& options) {
  std::vector<QAItem> items;
  std::set<std::string> ids;
  const std::string domain = lower(corpus::to_string(options.domain));

  for (std::size_t pi = 0; pi < kAllPatterns.size(); ++pi) {
    const Pattern pattern = kAllPatterns[pi];
    if (!options.patterns.contains(pattern)) continue;

    std::vector<const Triple*> pool;
    for (const auto& f : facts) {
      const bool take = pattern == Pattern::Negation   ? true
                        : pattern == Pattern::Direct   ? !f.derived()
                                                       : f.provenance.rule == to_string(pattern);
      if (take) pool.push_back(&f);
    }

    // Seeded partial Fisher-Yates on raw mt19937_64 output (portable, unlike
    // std::uniform_int_distribution), then restore pool order.
    if (const auto cap = options.caps.find(pattern); cap != options.caps.end() && pool.size() > cap->second) {
      std::mt19937_64 rng(options.seed ^ (0x9e3779b97f4a7c15ULL * (pi + 1)));
      std::vector<std::size_t> idx(pool.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < cap->second; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(cap->second);
      std::sort(idx.begin(), idx.end());
      std::vector<const Triple*> sampled;
      for (std::size_t i : idx) sampled.push_back(pool[i]);
      pool = std::move(sampled);
    }

    for (const Triple* f : pool) {
      const RelationMeta* meta = rules.find(f->relation);
      if (!meta) fail(ErrorKind::Config, "no relation metadata for '" + f->relation + "'");
      const std::string key(to_string(pattern));
      auto tmpl = meta->templates.find(key);
      if (tmpl == meta->templates.end() && pattern != Pattern::Negation) tmpl = meta->templates.find("direct");
      if (tmpl == meta->templates.end()) {
        fail(ErrorKind::Config, "relation '" + f->relation + "' has no template for pattern '" + key + "'");
      }
      QAItem item;
      item.id = domain + "/" + key + "/" + f->id();
      item.domain = options.domain;
      item.question = render(tmpl->second, f->subject, f->object);
      if (item.question.empty() || item.question.back() != '?') {
        fail(ErrorKind::Config, "template '" + tmpl->second + "' for relation '" + f->relation +
                                    "' does not render a question ending in '?'");
      }
      item.expected = pattern == Pattern::Negation ? Answer::No : Answer::Yes;
      item.pattern = pattern;
      item.derivation.push_back(f->id());
      item.derivation.insert(item.derivation.end(), f->provenance.parents.begin(), f->provenance.parents.end());
      if (!ids.insert(item.id).second) fail(ErrorKind::Internal, "duplicate item id " + item.id);
      items.push_back(std::move(item));
    }
  }
  return items;
}

std::string dump_dataset(const std::vector<QAItem>& items) {
  auto root = nlohmann::ordered_json::array();
  for (const auto& item : items) {
    nlohmann::ordered_json j;
    j["id"] = item.id;
    j["domain"] = corpus::to_string(item.domain);
    j["question"] = item.question;
    j["expected"] = to_string(item.expected);
    j["pattern"] = item.pattern ? nlohmann::ordered_json(to_string(*item.pattern)) : nullptr;
    j["derivation"] = item.derivation;
    root.push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::vector<QAItem> parse_dataset(std::string_view json_text, std::string_view origin) {
  const std::string where(origin);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Ingestion, where + ": " + e.what());
  }
  if (!root.is_array()) fail(ErrorKind::Ingestion, where + ": dataset must be a JSON array");

  std::vector<QAItem> items;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& j = root[i];
    const std::string at = where + " item " + std::to_string(i);
    try {
      QAItem item;
      item.id = j.at("id").get<std::string>();
      const auto domain = corpus::parse_domain(j.at("domain").get<std::string>());
      if (!domain) fail(ErrorKind::Ingestion, at + ": unknown domain");
      item.domain = *domain;
      item.question = j.at("question").get<std::string>();
      const auto expected = parse_answer(j.at("expected").get<std::string>());
      if (!expected) fail(ErrorKind::Ingestion, at + ": expected must be Yes or No");
      item.expected = *expected;
      if (j.contains("pattern") && !j["pattern"].is_null()) {
        item.pattern = parse_pattern(j["pattern"].get<std::string>());
        if (!item.pattern) fail(ErrorKind::Ingestion, at + ": unknown pattern");
        const Answer implied = *item.pattern == Pattern::Negation ? Answer::No : Answer::Yes;
        if (item.expected != implied) fail(ErrorKind::Ingestion, at + ": expected answer contradicts pattern");
      }
      if (j.contains("derivation")) item.derivation = j["derivation"].get<std::vector<std::string>>();
      if (item.id.empty()) fail(ErrorKind::Ingestion, at + ": empty id");
      if (item.question.empty() || item.question.back() != '?') {
        fail(ErrorKind::Ingestion, at + ": question must end with '?'");
      }
      if (!ids.insert(item.id).second) fail(ErrorKind::Ingestion, at + ": duplicate id '" + item.id + "'");
      items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Ingestion, at + ": " + e.what());
    }
  }
  return items;
}

std::vector<QAItem> load_dataset(const std::string& path) {
  return parse_dataset(read_text(path, ErrorKind::Ingestion), path);
}

}  // namespace omnibench::testgen
