#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace effortlab::eval {

// Lowercase, strip punctuation (apostrophes are dropped inside words),
// split on whitespace and spell out digit runs ("2" -> "two",
// "25" -> "twenty five").
std::vector<std::string> NormalizeTranscript(std::string_view text);

// Number words for 0..999999; longer digit runs are read digit by digit.
std::vector<std::string> SpellNumber(std::string_view digits);

bool IsStopWord(std::string_view token);
std::vector<std::string> ContentWords(std::span<const std::string> tokens);

// Length of the longest common subsequence, O(|a| * |b|) time, O(|b|) space.
std::size_t LcsLength(std::span<const std::string> a, std::span<const std::string> b);

// Fraction of reference content words recognized in order. Throws
// kInvalidArgument if the reference has no content words.
double WordRecognitionRate(std::string_view reference, std::string_view transcript);

}  // namespace effortlab::eval
