#include <algorithm>
#include <fstream>
#include <map>

#include "termforge/error.h"
#include "termforge/surface_clustering.h"
#include "termforge/text.h"

namespace termforge {
namespace {

std::string strip_trailing_s(std::string token) {
  if (token.size() > 1 && token.back() == 's') token.pop_back();
  return token;
}

std::string token_lemma(const std::string& token, const WordFormLexicon* lexicon) {
  std::string stripped = strip_trailing_s(token);
  if (lexicon) {
    if (auto l = lexicon->lemma(token)) return strip_trailing_s(*l);
    if (auto l = lexicon->lemma(stripped)) return strip_trailing_s(*l);
  }
  return stripped;
}

}  // namespace

void WordFormLexicon::add(std::string_view form, std::string_view lemma) {
  forms_.insert_or_assign(text::case_fold(form), text::case_fold(lemma));
}

std::optional<std::string> WordFormLexicon::lemma(std::string_view form) const {
  auto it = forms_.find(form);
  if (it == forms_.end()) return std::nullopt;
  return it->second;
}

WordFormLexicon WordFormLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open word-form lexicon " + path.string());
  WordFormLexicon lex;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) +
                                          ": expected form<TAB>lemma");
    }
    lex.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return lex;
}

std::string rbc_normalize(std::string_view surface, const WordFormLexicon* lexicon) {
  std::string key;
  for (const auto& token : text::split_words(text::case_fold(text::nfc(surface)))) {
    key += token_lemma(token, lexicon);
  }
  return key;
}

std::vector<RbcCluster> rbc_merge(std::span<const std::string> surfaces,
                                  const WordFormLexicon* lexicon) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& s : surfaces) groups[rbc_normalize(s, lexicon)].push_back(s);
  std::vector<RbcCluster> out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    out.push_back({key, std::move(members)});
  }
  std::sort(out.begin(), out.end(), [](const RbcCluster& a, const RbcCluster& b) {
    return a.members.front() < b.members.front();
  });
  return out;
}

}  // namespace termforge
