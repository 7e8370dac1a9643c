#include "kgatlas/preprocess.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "kgatlas/error.hpp"
#include "kgatlas/ingest.hpp"

namespace kgatlas {

namespace {

std::vector<char32_t> code_points(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 1;
        if (i + len > text.size()) len = 1;
        char32_t cp = len == 1 ? c : c & (0x7F >> len);
        for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::uint64_t total_mass(std::span<const Triplet> triples) {
    std::uint64_t mass = 0;
    for (const auto& t : triples) mass += t.multiplicity;
    return mass;
}

}  // namespace

void PipelineConfig::validate() const {
    if (min_relation_count < 1) throw Error(ErrorCode::Config, "min_relation_count must be at least 1");
    if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
        throw Error(ErrorCode::Config, "similarity_threshold must lie in [0, 1]");
    }
    if (long_tail_action == LongTailAction::Relabel && normalize_label(other_label).empty()) {
        throw Error(ErrorCode::Config, "other_label must be non-empty");
    }
    if (only_stage && (*only_stage < 1 || *only_stage > 4)) {
        throw Error(ErrorCode::Config, "only_stage must be between 1 and 4");
    }
    merge_map.validate();
}

RelationFrequency relation_frequency(std::span<const Triplet> triples) {
    RelationFrequency freq;
    for (const auto& t : triples) freq[normalize_label(t.predicate)] += t.multiplicity;
    return freq;
}

ConsolidationOutcome consolidate_rare_relations(std::span<const Triplet> triples, std::uint64_t min_count,
                                                LongTailAction action, const std::string& other_label,
                                                CountBasis basis) {
    if (min_count < 1) throw Error(ErrorCode::Config, "min_count must be at least 1");
    const std::string other = normalize_label(other_label);
    const auto weighted = relation_frequency(triples);
    RelationFrequency distinct;
    if (basis == CountBasis::Distinct) {
        for (const auto& t : triples) distinct[normalize_label(t.predicate)] += 1;
    }
    const auto& counted = basis == CountBasis::Distinct ? distinct : weighted;

    ConsolidationOutcome out;
    for (const auto& [label, count] : counted) {
        if (count >= min_count) continue;
        if (action == LongTailAction::Relabel && label == other) continue;
        out.consolidated.insert(label);
        out.tail_mass += weighted.at(label);
    }

    out.triples.reserve(triples.size());
    for (const auto& t : triples) {
        if (!out.consolidated.contains(normalize_label(t.predicate))) {
            out.triples.push_back(t);
        } else if (action == LongTailAction::Relabel) {
            out.triples.push_back(t);
            out.triples.back().predicate = other;
        }
    }
    return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    auto s = code_points(a);
    auto t = code_points(b);
    if (s.size() < t.size()) std::swap(s, t);
    std::vector<std::size_t> prev(t.size() + 1), cur(t.size() + 1);
    for (std::size_t j = 0; j <= t.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            std::size_t substitute = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
        }
        std::swap(prev, cur);
    }
    return prev[t.size()];
}

double label_similarity(std::string_view a, std::string_view b) {
    auto longest = std::max(code_points(a).size(), code_points(b).size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::vector<MergeCandidate> propose_merge_candidates(const std::set<std::string>& labels, double threshold) {
    std::vector<std::string> sorted(labels.begin(), labels.end());
    std::vector<MergeCandidate> out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            double score = label_similarity(sorted[i], sorted[j]);
            if (score >= threshold) out.push_back({sorted[i], sorted[j], score});
        }
    }
    std::sort(out.begin(), out.end(), [](const MergeCandidate& x, const MergeCandidate& y) {
        if (x.score != y.score) return x.score > y.score;
        return std::tie(x.label_a, x.label_b) < std::tie(y.label_a, y.label_b);
    });
    return out;
}

std::vector<Triplet> apply_merge_map(std::span<const Triplet> triples, const MergeMap& merge_map) {
    merge_map.validate();
    std::vector<Triplet> out(triples.begin(), triples.end());
    if (merge_map.empty()) return out;
    const auto& entries = merge_map.entries();
    for (auto& t : out) {
        if (auto it = entries.find(normalize_label(t.predicate)); it != entries.end()) t.predicate = it->second;
    }
    return out;
}

std::vector<Triplet> deduplicate(std::span<const Triplet> triples) {
    std::unordered_map<TripletKey, std::size_t, TripletKeyHash> index;
    index.reserve(triples.size());
    std::vector<Triplet> out;
    for (const auto& t : triples) {
        auto [it, inserted] = index.try_emplace(key_of(t), out.size());
        if (inserted) {
            out.push_back(t);
        } else {
            out[it->second].multiplicity += t.multiplicity;
        }
    }
    return out;
}

PipelineResult run_pipeline(std::span<const Triplet> triples, const PipelineConfig& config) {
    config.validate();

    PipelineResult result;
    auto& report = result.report;
    report.triples_in = triples.size();
    report.mass_in = total_mass(triples);
    report.frequency_before = relation_frequency(triples);

    if (config.only_stage) {
        report.stages_run = {*config.only_stage};
    } else {
        report.stages_run = {1, 2, 3, 4};
    }
    auto runs = [&](int stage) {
        return std::find(report.stages_run.begin(), report.stages_run.end(), stage) != report.stages_run.end();
    };
    std::set<std::string> consolidated;
    auto consolidate = [&](std::vector<Triplet>& current, CountBasis basis) {
        auto outcome = consolidate_rare_relations(current, config.min_relation_count, config.long_tail_action,
                                                  config.other_label, basis);
        consolidated.insert(outcome.consolidated.begin(), outcome.consolidated.end());
        current = std::move(outcome.triples);
    };
    auto dedup = [&](std::vector<Triplet>& current) {
        auto before = current.size();
        current = deduplicate(current);
        report.duplicates_removed += before - current.size();
    };

    std::vector<Triplet> current(triples.begin(), triples.end());

    if (runs(1)) consolidate(current, CountBasis::Weighted);

    for (const auto& [label, count] : relation_frequency(current)) report.merge_stage_labels.insert(label);

    if (runs(2)) {
        for (const auto& [variant, canonical] : config.merge_map.entries()) {
            if (report.merge_stage_labels.contains(variant)) ++report.relations_merged;
        }
        current = apply_merge_map(current, config.merge_map);
    }

    if (runs(3)) {
        dedup(current);
        if (config.second_consolidation_pass && runs(1)) {
            consolidate(current, CountBasis::Distinct);
            // Relabelling can make distinct triples collide.
            dedup(current);
        }
    }
    report.relations_consolidated = consolidated.size();

    if (runs(4)) {
        auto integrity = check_integrity(current, config.abbrev);
        report.missing_abbreviations = std::move(integrity.missing_abbreviations);
        report.labels_missing_abbrev = report.missing_abbreviations.size();
    }

    report.triples_out = current.size();
    report.mass_out = total_mass(current);
    report.frequency_after = relation_frequency(current);
    result.triples = std::move(current);
    return result;
}

nlohmann::json to_json(const PipelineReport& report) {
    return {
        {"relations_consolidated", report.relations_consolidated},
        {"relations_merged", report.relations_merged},
        {"duplicates_removed", report.duplicates_removed},
        {"labels_missing_abbrev", report.labels_missing_abbrev},
        {"missing_abbreviations", report.missing_abbreviations},
        {"triples_in", report.triples_in},
        {"triples_out", report.triples_out},
        {"mass_in", report.mass_in},
        {"mass_out", report.mass_out},
        {"frequency_before", report.frequency_before},
        {"frequency_after", report.frequency_after},
        {"stages_run", report.stages_run},
    };
}

std::string serialize_frequency(const RelationFrequency& frequency, char delimiter) {
    std::vector<std::pair<std::string, std::uint64_t>> rows(frequency.begin(), frequency.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::string out;
    for (const auto& [label, count] : rows) {
        out += quote_field(label, delimiter);
        out += delimiter;
        out += std::to_string(count);
        out += '\n';
    }
    return out;
}

std::string serialize_merge_candidates(std::span<const MergeCandidate> candidates, char delimiter) {
    std::string out;
    char score[32];
    for (const auto& c : candidates) {
        std::snprintf(score, sizeof score, "%.6f", c.score);
        out += quote_field(c.label_a, delimiter);
        out += delimiter;
        out += quote_field(c.label_b, delimiter);
        out += delimiter;
        out += score;
        out += '\n';
    }
    return out;
}

}  // namespace kgatlas
