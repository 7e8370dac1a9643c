#pragma once

#include <chrono>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgatlas/model.hpp"

namespace kgatlas {

struct BackendDescriptor {
    std::string name;
    std::string endpoint;  // http://host[:port][/path]
    std::chrono::milliseconds timeout{30000};

    /// Throws E_CONFIG on an empty name or non-positive timeout.
    void validate() const;
};

/// Source of candidate triples for one document.
class ExtractionBackend {
public:
    virtual ~ExtractionBackend() = default;

    virtual const std::string& name() const noexcept = 0;

    /// Raw candidates for `document`. Failures surface as E_BACKEND.
    virtual std::vector<Triplet> candidates(std::string_view document) = 0;
};

/// Offline backend for tests and demos. Either emits a fixed list of triples
/// for every document, or splits the text into sentences and cuts each one
/// around the first relation cue phrase it contains
/// ("Local governments favor investment." -> local governments / favor / investment).
class StubBackend final : public ExtractionBackend {
public:
    explicit StubBackend(std::vector<std::string> cue_phrases = default_cue_phrases(),
                         std::string name = "stub");

    static StubBackend fixed(std::vector<Triplet> triples, std::string name = "stub");
    static std::vector<std::string> default_cue_phrases();

    const std::string& name() const noexcept override { return name_; }
    std::vector<Triplet> candidates(std::string_view document) override;

private:
    std::string name_;
    std::vector<std::string> cues_;  // normalized, longest first
    std::vector<Triplet> fixed_;
    bool use_fixed_ = false;
};

/// JSON over HTTP: POST {"document": text} -> {"triples": [{subject, predicate, object}, ...]}.
class HttpBackend final : public ExtractionBackend {
public:
    explicit HttpBackend(BackendDescriptor descriptor);

    const std::string& name() const noexcept override { return descriptor_.name; }
    std::vector<Triplet> candidates(std::string_view document) override;

private:
    BackendDescriptor descriptor_;
    std::string origin_;  // scheme://host:port
    std::string path_;
};

/// Runs `backend` on `document` and tags every candidate with the backend
/// name. Throws E_EMPTY_DOC for blank documents and E_BACKEND for backend
/// failures or candidates with blank fields.
std::vector<Triplet> extract_triplets(std::string_view document, ExtractionBackend& backend);

class LowValueLexicon {
public:
    LowValueLexicon() = default;
    explicit LowValueLexicon(std::span<const std::string> terms);

    /// Generic entity nouns seeded by default: "result" and "study".
    static LowValueLexicon defaults();

    void add(std::string_view term);
    bool contains(std::string_view label) const;
    const std::set<std::string>& terms() const noexcept { return terms_; }

private:
    std::set<std::string> terms_;
};

/// Drops candidates whose subject or object is in `lexicon`; order preserved.
std::vector<Triplet> filter_low_value(std::span<const Triplet> candidates, const LowValueLexicon& lexicon);

/// Picks the member with the shortest object (fewest tokens), breaking ties by
/// the smallest normalized object. Members must share normalized subject and
/// predicate (E_MIXED_GROUP otherwise); empty groups raise E_EMPTY_GROUP.
Triplet select_preferred(std::span<const Triplet> group);

/// Groups by (normalized subject, predicate) and keeps one preferred triple
/// per group, in order of each group's first appearance.
std::vector<Triplet> select_preferred_per_group(std::span<const Triplet> candidates);

}  // namespace kgatlas
