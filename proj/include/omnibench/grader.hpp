#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "omnibench/provider.hpp"
#include "omnibench/testgen.hpp"

namespace omnibench::grader {

enum class Label { Yes, No, Abstain };

std::string_view to_string(Label label) noexcept;

struct Judgment {
  Label label = Label::Abstain;
  /// Token or phrase that decided the label; empty for Abstain.
  std::string matched_evidence;

  bool operator==(const Judgment&) const = default;
};

struct Lexicon {
  std::set<std::string> affirm = {"yes", "true", "correct", "indeed", "affirmative"};
  std::set<std::string> negate = {"no", "not", "false", "incorrect", "never"};
  /// Negation words that, followed within three tokens by another lexicon
  /// word, flip that word's polarity ("not false" reads as affirmation).
  std::set<std::string> negators = {"not", "never"};

  /// {"affirm": [...], "negate": [...], "negators": [...]}; missing keys keep
  /// the defaults, unknown keys are a Config error.
  static Lexicon from_json(std::string_view json_text);
};

class Grader {
 public:
  virtual ~Grader() = default;
  virtual Judgment judge(std::string_view answer_text) = 0;
  virtual std::string id() const = 0;
};

class LexicalGrader final : public Grader {
 public:
  explicit LexicalGrader(Lexicon lexicon = {}) : lexicon_(std::move(lexicon)) {}

  Judgment judge(std::string_view answer_text) override;
  std::string id() const override { return "lexical/v1"; }

 private:
  Lexicon lexicon_;
};

/// Asks a chat model to classify the answer as Yes or No, then reads the
/// classifier's reply with the lexical grader.
class RemoteGrader final : public Grader {
 public:
  explicit RemoteGrader(std::shared_ptr<provider::Provider> classifier, Lexicon lexicon = {});

  Judgment judge(std::string_view answer_text) override;
  std::string id() const override { return "remote-classifier:" + classifier_->id(); }

 private:
  std::shared_ptr<provider::Provider> classifier_;
  LexicalGrader reader_;
};

/// Pure lexical decision procedure behind LexicalGrader.
Judgment judge(std::string_view answer_text, const Lexicon& lexicon = {});

/// Abstain is never correct.
bool score(const Judgment& judgment, testgen::Answer expected) noexcept;

}  // namespace omnibench::grader
