#include "omnibench/grader.hpp"

#include <cctype>
#include <optional>
#include <vector>

#include <json.hpp>

#include "omnibench/error.hpp"

namespace omnibench::grader {
namespace {

constexpr std::size_t kNegatorWindow = 3;

struct Hit {
  Label label;
  std::string evidence;
};

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c == '\'') continue;  // "don't" -> "dont"
    if (std::isspace(c) || (c < 0x80 && std::ispunct(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Hit> scan(const std::vector<std::string>& tokens, const Lexicon& lex) {
  const auto polarity = [&](const std::string& t) -> std::optional<Label> {
    if (lex.affirm.contains(t)) return Label::Yes;
    if (lex.negate.contains(t)) return Label::No;
    return std::nullopt;
  };

  std::vector<Hit> hits;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto pol = polarity(tokens[i]);
    if (!pol) continue;
    if (lex.negators.contains(tokens[i])) {
      std::optional<std::size_t> partner;
      for (std::size_t j = i + 1; j < tokens.size() && j <= i + kNegatorWindow; ++j) {
        if (polarity(tokens[j])) {
          partner = j;
          break;
        }
      }
      if (partner) {
        const Label flipped = *polarity(tokens[*partner]) == Label::Yes ? Label::No : Label::Yes;
        std::string evidence = tokens[i];
        for (std::size_t j = i + 1; j <= *partner; ++j) evidence += " " + tokens[j];
        hits.push_back({flipped, std::move(evidence)});
        i = *partner;
        continue;
      }
    }
    hits.push_back({*pol, tokens[i]});
  }
  return hits;
}

std::string_view first_sentence(std::string_view text) {
  const auto end = text.find_first_of(".!?\n");
  return end == std::string_view::npos ? text : text.substr(0, end);
}

std::set<std::string> lower_set(const std::vector<std::string>& in) {
  std::set<std::string> out;
  for (const auto& w : in) {
    const auto split = words(w);
    if (split.size() != 1) fail(ErrorKind::Config, "lexicon entry '" + w + "' must be a single word");
    out.insert(split.front());
  }
  return out;
}

}  // namespace

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::Yes: return "Yes";
    case Label::No: return "No";
    case Label::Abstain: return "Abstain";
  }
  return "?";
}

Lexicon Lexicon::from_json(std::string_view json_text) {
  Lexicon lex;
  try {
    const auto root = nlohmann::json::parse(json_text);
    for (const auto& [key, value] : root.items()) {
      const auto list = lower_set(value.get<std::vector<std::string>>());
      if (key == "affirm") {
        lex.affirm = list;
      } else if (key == "negate") {
        lex.negate = list;
      } else if (key == "negators") {
        lex.negators = list;
      } else {
        fail(ErrorKind::Config, "lexicon: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("lexicon: ") + e.what());
  }
  for (const auto& w : lex.affirm) {
    if (lex.negate.contains(w)) fail(ErrorKind::Config, "lexicon word '" + w + "' is both affirm and negate");
  }
  return lex;
}

Judgment judge(std::string_view answer_text, const Lexicon& lexicon) {
  const auto head = scan(words(first_sentence(answer_text)), lexicon);
  bool yes = false;
  bool no = false;
  for (const auto& h : head) (h.label == Label::Yes ? yes : no) = true;
  if (yes != no) return {head.front().label, head.front().evidence};

  const auto all = scan(words(answer_text), lexicon);
  if (all.empty()) return {Label::Abstain, ""};
  return {all.front().label, all.front().evidence};
}

Judgment LexicalGrader::judge(std::string_view answer_text) { return grader::judge(answer_text, lexicon_); }

RemoteGrader::RemoteGrader(std::shared_ptr<provider::Provider> classifier, Lexicon lexicon)
    : classifier_(std::move(classifier)), reader_(std::move(lexicon)) {
  if (!classifier_) fail(ErrorKind::Config, "remote grader needs a classifier provider");
}

Judgment RemoteGrader::judge(std::string_view answer_text) {
  provider::GenerationRequest req;
  req.system_prompt = "You classify answers to yes/no questions.";
  req.user_prompt =
      "Does the following answer affirm (Yes) or deny (No)? Reply with exactly one word: "
      "Yes, No, or Unclear.\n\nAnswer: " +
      std::string(answer_text);
  req.max_tokens = 4;
  return reader_.judge(classifier_->generate(req).text);
}

bool score(const Judgment& judgment, testgen::Answer expected) noexcept {
  switch (judgment.label) {
    case Label::Yes: return expected == testgen::Answer::Yes;
    case Label::No: return expected == testgen::Answer::No;
    case Label::Abstain: return false;
  }
  return false;
}

}  // namespace omnibench::grader
