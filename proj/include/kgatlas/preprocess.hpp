#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgatlas/model.hpp"

namespace kgatlas {

enum class LongTailAction { Drop, Relabel };

struct PipelineConfig {
    std::uint64_t min_relation_count = 3;
    LongTailAction long_tail_action = LongTailAction::Relabel;
    std::string other_label = "other";
    double similarity_threshold = 0.6;
    MergeMap merge_map;
    AbbrevTable abbrev;
    /// Consolidate again after deduplication, counting distinct triples
    /// instead of raw multiplicity.
    bool second_consolidation_pass = false;
    /// Run just one stage (1 consolidate, 2 merge, 3 dedup, 4 abbreviation check).
    std::optional<int> only_stage;

    /// Throws E_CONFIG for out-of-range values and propagates merge map errors.
    void validate() const;
};

/// Relation label -> multiplicity-weighted triple count.
using RelationFrequency = std::map<std::string, std::uint64_t>;

RelationFrequency relation_frequency(std::span<const Triplet> triples);

/// What a relation's count measures: summed multiplicity, or one per triple.
enum class CountBasis { Weighted, Distinct };

struct ConsolidationOutcome {
    std::vector<Triplet> triples;
    std::set<std::string> consolidated;  // relation labels that fell below the threshold
    std::uint64_t tail_mass = 0;         // weighted count of the affected triples
};

/// Stage I. Relations whose count is below `min_count` are dropped or
/// relabelled to `other_label`. The other label itself is never counted as
/// consolidated when relabelling.
ConsolidationOutcome consolidate_rare_relations(std::span<const Triplet> triples, std::uint64_t min_count,
                                                LongTailAction action, const std::string& other_label,
                                                CountBasis basis = CountBasis::Weighted);

/// Edit distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - levenshtein(a, b) / max(|a|, |b|), lengths in code points; 1 for two empty strings.
double label_similarity(std::string_view a, std::string_view b);

struct MergeCandidate {
    std::string label_a;  // label_a < label_b
    std::string label_b;
    double score = 0.0;

    friend bool operator==(const MergeCandidate&, const MergeCandidate&) = default;
};

/// Stage II review artifact: every unordered pair scoring at least
/// `threshold`, best first, then lexicographic. Never applied automatically.
std::vector<MergeCandidate> propose_merge_candidates(const std::set<std::string>& labels, double threshold);

/// Stage II. Validates `merge_map` then rewrites predicates found as variants.
std::vector<Triplet> apply_merge_map(std::span<const Triplet> triples, const MergeMap& merge_map);

/// Stage III. One triple per normalized key; multiplicities summed; first
/// occurrence (and its provenance) kept in first-occurrence order.
std::vector<Triplet> deduplicate(std::span<const Triplet> triples);

struct PipelineReport {
    std::size_t relations_consolidated = 0;
    std::size_t relations_merged = 0;
    std::size_t duplicates_removed = 0;
    std::size_t labels_missing_abbrev = 0;
    std::vector<std::string> missing_abbreviations;
    std::size_t triples_in = 0;
    std::size_t triples_out = 0;
    std::uint64_t mass_in = 0;
    std::uint64_t mass_out = 0;
    RelationFrequency frequency_before;
    RelationFrequency frequency_after;
    std::vector<int> stages_run;
    /// Labels entering stage II; input for the merge-candidate review file.
    std::set<std::string> merge_stage_labels;
};

struct PipelineResult {
    std::vector<Triplet> triples;
    PipelineReport report;
};

/// Stages in order: consolidate, merge (then optionally consolidate again),
/// deduplicate, abbreviation check.
PipelineResult run_pipeline(std::span<const Triplet> triples, const PipelineConfig& config);

nlohmann::json to_json(const PipelineReport& report);

/// Two-column delimited table, heaviest first then by label.
std::string serialize_frequency(const RelationFrequency& frequency, char delimiter = ',');

/// Three-column delimited review file (label_a, label_b, score with 6 decimals).
std::string serialize_merge_candidates(std::span<const MergeCandidate> candidates, char delimiter = ',');

}  // namespace kgatlas
