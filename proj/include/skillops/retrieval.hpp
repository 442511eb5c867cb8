#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skillops/contract.hpp"

namespace skillops {

/// Lowercase split on non-alphanumeric ASCII.
[[nodiscard]] std::vector<std::string> tokenize(std::string_view text);

/// The text a skill is retrieved by: goal, tags, and body.
[[nodiscard]] std::string retrieval_text(const SkillContract& s);

/// Okapi BM25 over one document per skill, idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
class Bm25Index {
  public:
    Bm25Index(std::span<const SkillContract> skills, double k1 = 1.2, double b = 0.75);

    /// Raw score of every document, in library order. Repeated query terms count once.
    [[nodiscard]] std::vector<double> scores(const std::vector<std::string>& query) const;

    [[nodiscard]] std::size_t size() const noexcept { return m_doc_len.size(); }

  private:
    double m_k1;
    double m_b;
    double m_avgdl = 0.0;
    std::vector<std::size_t> m_doc_len;
    // term -> (doc, tf) postings in doc order
    std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> m_postings;
};

/// Term-frequency feature hashing into 2^16 buckets (FNV-1a 64), cosine similarity.
class HashingVectorizer {
  public:
    static constexpr std::uint32_t kBuckets = 1U << 16;

    using SparseVector = std::vector<std::pair<std::uint32_t, double>>;  // sorted by bucket

    [[nodiscard]] static std::uint32_t bucket(std::string_view token);
    [[nodiscard]] static SparseVector transform(const std::vector<std::string>& tokens);
    /// Cosine clipped to [0, 1]; 0 when either vector is empty.
    [[nodiscard]] static double cosine(const SparseVector& a, const SparseVector& b);
};

}  // namespace skillops
