#include "skillops/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace skillops {

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            cur.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

std::string retrieval_text(const SkillContract& s)
{
    std::string text = s.goal;
    for (const auto& t : s.tags) {
        text += ' ';
        text += t;
    }
    text += '\n';
    text += s.body;
    return text;
}

Bm25Index::Bm25Index(std::span<const SkillContract> skills, double k1, double b) : m_k1(k1), m_b(b)
{
    std::size_t total = 0;
    for (std::uint32_t d = 0; d < skills.size(); ++d) {
        auto tokens = tokenize(retrieval_text(skills[d]));
        m_doc_len.push_back(tokens.size());
        total += tokens.size();
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : tokens) {
            ++tf[t];
        }
        for (auto& [term, count] : tf) {
            m_postings[term].emplace_back(d, count);
        }
    }
    m_avgdl = skills.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(skills.size());
}

std::vector<double> Bm25Index::scores(const std::vector<std::string>& query) const
{
    std::vector<double> out(m_doc_len.size(), 0.0);
    if (m_doc_len.empty() || m_avgdl == 0.0) {
        return out;
    }
    const auto n = static_cast<double>(m_doc_len.size());
    const std::set<std::string> terms(query.begin(), query.end());
    for (const auto& term : terms) {
        auto it = m_postings.find(term);
        if (it == m_postings.end()) {
            continue;
        }
        const auto df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (auto [doc, tf] : it->second) {
            const double f = tf;
            const double norm = m_k1 * (1.0 - m_b + m_b * static_cast<double>(m_doc_len[doc]) / m_avgdl);
            out[doc] += idf * f * (m_k1 + 1.0) / (f + norm);
        }
    }
    return out;
}

std::uint32_t HashingVectorizer::bucket(std::string_view token)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : token) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return static_cast<std::uint32_t>(h & (kBuckets - 1));
}

HashingVectorizer::SparseVector HashingVectorizer::transform(const std::vector<std::string>& tokens)
{
    std::map<std::uint32_t, double> counts;
    for (const auto& t : tokens) {
        counts[bucket(t)] += 1.0;
    }
    return {counts.begin(), counts.end()};
}

double HashingVectorizer::cosine(const SparseVector& a, const SparseVector& b)
{
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (auto& [_, v] : a) {
        na += v * v;
    }
    for (auto& [_, v] : b) {
        nb += v * v;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            dot += a[i].second * b[j].second;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace skillops
