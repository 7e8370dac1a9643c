#include "kgatlas/model.hpp"

#include <functional>

#include "kgatlas/error.hpp"

namespace kgatlas {

namespace {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(char c) noexcept {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::string_view trim(std::string_view text) noexcept {
    while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
    return text;
}

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = lower(c);
    return out;
}

std::string normalize_label(std::string_view label) {
    std::string out;
    out.reserve(label.size());
    bool pending_space = false;
    for (char c : label) {
        if (c == '-' || c == '_' || is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(lower(c));
    }
    return out;
}

TripletKey key_of(const Triplet& t) {
    return {normalize_label(t.subject), normalize_label(t.predicate), normalize_label(t.object)};
}

std::size_t TripletKeyHash::operator()(const TripletKey& key) const noexcept {
    std::hash<std::string> h;
    std::size_t seed = h(key.subject);
    for (const auto* part : {&key.predicate, &key.object}) {
        seed ^= h(*part) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
    }
    return seed;
}

void validate(const Triplet& t) {
    if (trim(t.subject).empty() || trim(t.predicate).empty() || trim(t.object).empty()) {
        throw Error(ErrorCode::InvalidTriplet, "subject, predicate and object must be non-empty");
    }
    if (t.multiplicity == 0) {
        throw Error(ErrorCode::InvalidTriplet, "multiplicity must be at least 1");
    }
}

void AbbrevTable::add(std::string_view label, std::string_view alias) {
    std::string key = normalize_label(label);
    std::string value(trim(alias));
    if (key.empty()) {
        throw Error(ErrorCode::BadField, "abbreviation row has an empty relation label");
    }
    if (value.empty()) {
        throw Error(ErrorCode::EmptyAlias, "relation '" + key + "' has an empty alias");
    }
    if (auto it = entries_.find(key); it != entries_.end()) {
        if (it->second == value) return;
        throw Error(ErrorCode::DuplicateLabel, "relation '" + key + "' is mapped to both '" +
                                                   it->second + "' and '" + value + "'");
    }
    if (auto it = owner_of_alias_.find(value); it != owner_of_alias_.end()) {
        throw Error(ErrorCode::AliasCollision, "alias '" + value + "' is shared by '" +
                                                   it->second + "' and '" + key + "'");
    }
    owner_of_alias_.emplace(value, key);
    entries_.emplace(std::move(key), std::move(value));
}

std::optional<std::string> AbbrevTable::alias_for(std::string_view label) const {
    auto it = entries_.find(normalize_label(label));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool AbbrevTable::contains(std::string_view label) const {
    return entries_.contains(normalize_label(label));
}

void MergeMap::add(std::string_view variant, std::string_view canonical) {
    std::string from = normalize_label(variant);
    std::string to = normalize_label(canonical);
    if (from.empty() || to.empty()) {
        throw Error(ErrorCode::BadField, "merge map entries need both a variant and a canonical label");
    }
    if (from == to) {
        throw Error(ErrorCode::MergeSelf, "'" + from + "' maps to itself");
    }
    if (auto it = entries_.find(from); it != entries_.end() && it->second != to) {
        throw Error(ErrorCode::DuplicateLabel, "variant '" + from + "' is mapped to both '" +
                                                   it->second + "' and '" + to + "'");
    }
    entries_.emplace(std::move(from), std::move(to));
}

void MergeMap::validate() const {
    for (const auto& [from, to] : entries_) {
        if (from == to) throw Error(ErrorCode::MergeSelf, "'" + from + "' maps to itself");
        if (entries_.contains(to)) {
            throw Error(ErrorCode::MergeChain, "canonical label '" + to + "' (target of '" + from +
                                                   "') is itself a variant of '" +
                                                   entries_.at(to) + "'");
        }
    }
}

const std::string& MergeMap::resolve(const std::string& label) const {
    auto it = entries_.find(label);
    return it == entries_.end() ? label : it->second;
}

}  // namespace kgatlas
