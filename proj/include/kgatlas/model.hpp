#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace kgatlas {

/// Canonical label encoding shared by entities and relations: lowercase,
/// hyphens and underscores become spaces, whitespace runs collapse to one
/// space, and the ends are trimmed. Only ASCII letters change case; other
/// UTF-8 sequences pass through untouched. Idempotent.
std::string normalize_label(std::string_view label);

/// Strips leading and trailing ASCII whitespace.
std::string_view trim(std::string_view text) noexcept;

/// ASCII-only lowercase copy.
std::string ascii_lower(std::string_view text);

struct Triplet {
    std::string subject;
    std::string predicate;
    std::string object;
    std::optional<std::string> paper_id;
    std::optional<std::string> source;
    std::uint64_t multiplicity = 1;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Identity used by deduplication and graph construction. Provenance and
/// multiplicity are not part of it.
struct TripletKey {
    std::string subject;
    std::string predicate;
    std::string object;

    friend bool operator==(const TripletKey&, const TripletKey&) = default;
    friend auto operator<=>(const TripletKey&, const TripletKey&) = default;
};

TripletKey key_of(const Triplet& t);

struct TripletKeyHash {
    std::size_t operator()(const TripletKey& key) const noexcept;
};

/// Throws Error(InvalidTriplet) when a core field is blank or multiplicity is 0.
void validate(const Triplet& t);

struct PaperRecord {
    std::string paper_id;
    std::string title;
    int year = 0;
    std::string journal;
    std::vector<std::string> authors;
    std::vector<std::string> institutions;

    friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

/// Relation label -> short alias. Labels are stored normalized; aliases are
/// non-empty and unique across the table.
class AbbrevTable {
public:
    AbbrevTable() = default;

    /// Adds `label -> alias`. Re-adding an identical entry is a no-op.
    /// Throws EmptyAlias, AliasCollision (alias already owned by another
    /// label) or DuplicateLabel (label already mapped to a different alias).
    void add(std::string_view label, std::string_view alias);

    /// Lookup by label; the label is normalized first.
    std::optional<std::string> alias_for(std::string_view label) const;
    bool contains(std::string_view label) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::map<std::string, std::string> entries_;
    std::map<std::string, std::string> owner_of_alias_;
};

/// Variant relation label -> canonical label, both normalized.
class MergeMap {
public:
    MergeMap() = default;

    /// Adds an entry without checking the chain invariant (that needs the whole
    /// map); self-mappings are rejected immediately with MergeSelf.
    void add(std::string_view variant, std::string_view canonical);

    /// Throws MergeSelf or MergeChain when the map is not idempotent.
    void validate() const;

    /// Canonical label for `label`, or `label` itself when it is not a variant.
    const std::string& resolve(const std::string& label) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace kgatlas
