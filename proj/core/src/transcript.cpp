#include "effortlab/transcript.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "effortlab/error.hpp"

namespace effortlab::eval {

namespace {

// English function words excluded from WRR. Apostrophes are removed before
// lookup, so contractions appear without them. Sorted for binary search.
constexpr std::array<std::string_view, 140> kStopWords = {
    "a",       "about",   "above",    "after",     "again",     "against", "all",    "am",
    "an",      "and",     "any",      "are",       "arent",     "as",      "at",     "be",
    "because", "been",    "before",   "being",     "below",     "between", "both",   "but",
    "by",      "can",     "cant",     "could",     "couldnt",   "did",     "didnt",  "do",
    "does",    "doesnt",  "doing",    "dont",      "down",      "during",  "each",   "few",
    "for",     "from",    "further",  "had",       "has",       "have",    "having", "he",
    "her",     "here",    "hers",     "herself",   "him",       "himself", "his",    "how",
    "i",       "if",      "in",       "into",      "is",        "isnt",    "it",     "its",
    "itself",  "just",    "may",      "me",        "might",     "more",    "most",   "must",
    "my",      "myself",  "no",       "nor",       "not",       "now",     "of",     "off",
    "on",      "once",    "only",     "or",        "other",     "our",     "ours",   "ourselves",
    "out",     "over",    "own",      "same",      "shall",     "she",     "should", "so",
    "some",    "such",    "than",     "that",      "the",       "their",   "theirs", "them",
    "themselves", "then", "there",    "these",     "they",      "this",    "those",  "through",
    "to",      "too",     "under",    "until",     "up",        "upon",    "very",   "was",
    "wasnt",   "we",      "were",     "what",      "when",      "where",   "which",  "while",
    "who",     "whom",    "why",      "will",      "with",      "wont",    "would",  "you",
    "your",    "yours",   "yourself", "yourselves"};

constexpr std::array<std::string_view, 20> kOnes = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

constexpr std::array<std::string_view, 10> kTens = {"",      "",      "twenty",  "thirty", "forty",
                                                    "fifty", "sixty", "seventy", "eighty", "ninety"};

void SpellBelowThousand(int n, std::vector<std::string>& out) {
  if (n >= 100) {
    out.emplace_back(kOnes[n / 100]);
    out.emplace_back("hundred");
    n %= 100;
    if (n == 0) return;
  }
  if (n < 20) {
    out.emplace_back(kOnes[n]);
    return;
  }
  out.emplace_back(kTens[n / 10]);
  if (n % 10 != 0) out.emplace_back(kOnes[n % 10]);
}

void AppendToken(std::string& token, std::vector<std::string>& out) {
  if (token.empty()) return;
  if (std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
    for (auto& word : SpellNumber(token)) out.push_back(std::move(word));
  } else {
    out.push_back(token);
  }
  token.clear();
}

}  // namespace

std::vector<std::string> SpellNumber(std::string_view digits) {
  std::vector<std::string> out;
  const auto first = digits.find_first_not_of('0');
  const std::string_view trimmed = first == std::string_view::npos ? "0" : digits.substr(first);
  if (trimmed.size() > 6 || (digits.size() > 1 && digits.front() == '0')) {
    for (char c : digits) out.emplace_back(kOnes[c - '0']);
    return out;
  }
  const int n = std::stoi(std::string(trimmed));
  if (n == 0) {
    out.emplace_back("zero");
    return out;
  }
  if (n >= 1000) {
    SpellBelowThousand(n / 1000, out);
    out.emplace_back("thousand");
  }
  if (n % 1000 != 0) SpellBelowThousand(n % 1000, out);
  return out;
}

std::vector<std::string> NormalizeTranscript(std::string_view text) {
  std::vector<std::string> tokens;
  std::string token;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == '\'') continue;
    if (c >= 0x80 || std::isalnum(c)) {
      // A switch between digits and letters splits the token ("2cups").
      if (!token.empty() && c < 0x80 &&
          (std::isdigit(c) != 0) != (std::isdigit(static_cast<unsigned char>(token.back())) != 0)) {
        AppendToken(token, tokens);
      }
      token.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      AppendToken(token, tokens);
    }
  }
  AppendToken(token, tokens);
  return tokens;
}

bool IsStopWord(std::string_view token) {
  return std::binary_search(kStopWords.begin(), kStopWords.end(), token);
}

std::vector<std::string> ContentWords(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (!IsStopWord(t)) out.push_back(t);
  }
  return out;
}

std::size_t LcsLength(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const auto& x : a) {
    std::size_t diagonal = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t above = row[j + 1];
      row[j + 1] = x == b[j] ? diagonal + 1 : std::max(row[j], above);
      diagonal = above;
    }
  }
  return row.back();
}

double WordRecognitionRate(std::string_view reference, std::string_view transcript) {
  const auto ref = ContentWords(NormalizeTranscript(reference));
  if (ref.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "reference has no content words");
  }
  const auto hyp = ContentWords(NormalizeTranscript(transcript));
  return static_cast<double>(LcsLength(ref, hyp)) / static_cast<double>(ref.size());
}

}  // namespace effortlab::eval
