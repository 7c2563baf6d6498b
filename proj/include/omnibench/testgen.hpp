#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "omnibench/corpus.hpp"

namespace omnibench::testgen {

struct Provenance {
  std::string source;                // source_uri, or "derived"
  std::string rule;                  // empty for seed facts
  std::vector<std::string> parents;  // fact ids of the premises

  bool operator==(const Provenance&) const = default;
};

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
  Provenance provenance;

  /// Content-derived id, stable across runs: "f" + 16 hex digits of the
  /// FNV-1a hash of subject, relation and object.
  std::string id() const;
  bool derived() const { return !provenance.rule.empty(); }

  bool operator==(const Triple&) const = default;
};

std::string fact_id(std::string_view subject, std::string_view relation, std::string_view object);

struct RelationMeta {
  std::string name;
  bool symmetric = false;
  bool transitive = false;
  std::optional<std::string> inverse_of;
  /// Pattern name -> question template with {s} and {o} placeholders.
  std::map<std::string, std::string> templates;
};

/// (s, first, m) and (m, second, o) entail (s, result, o).
struct Composition {
  std::string first;
  std::string second;
  std::string result;
};

struct RuleSet {
  std::vector<RelationMeta> relations;
  std::vector<Composition> compositions;

  const RelationMeta* find(std::string_view relation) const;
  /// Mutual inverses, known relation references and the direct/negation
  /// templates on every relation. Throws Config.
  void validate() const;
};

/// JSON: {"relations":[{"name","symmetric","transitive","inverse_of",
/// "templates":{...}}], "compositions":[{"first","second","result"}]}
RuleSet parse_rules(std::string_view json_text, std::string_view origin = "<rules>");
RuleSet load_rules(const std::string& path);

struct LoadResult {
  std::vector<Triple> triples;
  std::size_t duplicates_dropped = 0;
};

/// TSV rows `subject \t relation \t object \t source_uri`. Blank lines and
/// lines starting with '#' are skipped; the source column may be omitted.
LoadResult parse_triples(std::string_view tsv, const RuleSet& rules, std::string_view origin = "<triples>");
LoadResult load_triples(const std::string& path, const RuleSet& rules);

enum class Rule { Symmetric, Inverse, Transitive, Composite };

std::string_view to_string(Rule rule) noexcept;

struct DeriveOptions {
  std::size_t max_depth = 8;
  std::set<Rule> rules = {Rule::Symmetric, Rule::Inverse, Rule::Transitive, Rule::Composite};
  /// Relations the inverse rule is applied to. Empty means every relation
  /// that declares inverse_of; naming one without inverse_of is a Config error.
  std::vector<std::string> inverse_relations;
};

/// Semi-naive fixpoint of the enabled rules, at most `max_depth` rounds.
/// Returns input plus derived facts, sorted by (relation, subject, object).
std::vector<Triple> derive(const std::vector<Triple>& facts, const RuleSet& rules,
                           const DeriveOptions& options = {});

enum class Pattern { Direct, Negation, Inverse, Symmetric, Transitive, Composite };
enum class Answer { Yes, No };

inline constexpr std::array<Pattern, 6> kAllPatterns = {
    Pattern::Direct, Pattern::Negation, Pattern::Inverse,
    Pattern::Symmetric, Pattern::Transitive, Pattern::Composite};

std::string_view to_string(Pattern p) noexcept;
std::optional<Pattern> parse_pattern(std::string_view name);
std::string_view to_string(Answer a) noexcept;
std::optional<Answer> parse_answer(std::string_view text);

struct QAItem {
  std::string id;
  corpus::DomainTag domain = corpus::DomainTag::Geography;
  std::string question;
  Answer expected = Answer::Yes;
  /// Absent for items loaded from external datasets that do not record one.
  std::optional<Pattern> pattern;
  std::vector<std::string> derivation;

  bool operator==(const QAItem&) const = default;
};

struct GenerateOptions {
  std::set<Pattern> patterns = {kAllPatterns.begin(), kAllPatterns.end()};
  /// Per-pattern maximum; patterns without an entry are uncapped.
  std::map<Pattern, std::size_t> caps;
  std::uint64_t seed = 42;
  corpus::DomainTag domain = corpus::DomainTag::Geography;
};

std::string render(std::string_view tmpl, std::string_view subject, std::string_view object);

/// Templated Yes/No items over a derived fact store. Seed facts feed
/// `direct`, every fact feeds `negation`, derived facts feed the pattern of
/// the rule that produced them.
std::vector<QAItem> generate_qa(const std::vector<Triple>& facts, const RuleSet& rules,
                                const GenerateOptions& options);

std::string dump_dataset(const std::vector<QAItem>& items);
std::vector<QAItem> parse_dataset(std::string_view json_text, std::string_view origin = "<dataset>");
std::vector<QAItem> load_dataset(const std::string& path);

}  // namespace omnibench::testgen
