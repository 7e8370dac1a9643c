#include "kgatlas/extraction.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <cctype>

#include <httplib.h>
#include <json.hpp>

#include "kgatlas/error.hpp"

namespace kgatlas {

using nlohmann::json;

namespace {

bool is_word_char(char c) noexcept {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
}

std::string collapse_spaces(std::string_view text) {
    std::string out;
    bool space = false;
    for (char c : trim(text)) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(c);
    }
    return out;
}

std::string_view strip_punct(std::string_view text) {
    constexpr std::string_view punct = " ,;:\"'()[]";
    while (!text.empty() && punct.find(text.front()) != std::string_view::npos) text.remove_prefix(1);
    while (!text.empty() && punct.find(text.back()) != std::string_view::npos) text.remove_suffix(1);
    return text;
}

std::vector<std::string_view> split_sentences(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        bool end = i == text.size() || text[i] == '.' || text[i] == '!' || text[i] == '?' ||
                   text[i] == '\n';
        if (!end) continue;
        auto sentence = trim(text.substr(start, i - start));
        if (!sentence.empty()) out.push_back(sentence);
        start = i + 1;
    }
    return out;
}

std::size_t token_count(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

struct Endpoint {
    std::string origin;
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
        throw Error(ErrorCode::Config, "backend endpoint must be an http:// URL, got '" + url + "'");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

Triplet triplet_from_response(const json& item) {
    if (!item.is_object()) throw Error(ErrorCode::Backend, "triple entry is not an object");
    Triplet t;
    for (auto [key, field] : {std::pair{"subject", &t.subject}, std::pair{"predicate", &t.predicate},
                              std::pair{"object", &t.object}}) {
        auto it = item.find(key);
        if (it == item.end() || !it->is_string()) {
            throw Error(ErrorCode::Backend, std::string("triple entry lacks a string '") + key + "'");
        }
        *field = it->get<std::string>();
    }
    if (auto it = item.find("paper_id"); it != item.end() && it->is_string()) t.paper_id = it->get<std::string>();
    return t;
}

}  // namespace

void BackendDescriptor::validate() const {
    if (trim(name).empty()) throw Error(ErrorCode::Config, "backend name must be non-empty");
    if (timeout.count() <= 0) throw Error(ErrorCode::Config, "backend timeout must be positive");
}

StubBackend::StubBackend(std::vector<std::string> cue_phrases, std::string name) : name_(std::move(name)) {
    for (auto& cue : cue_phrases) {
        auto normalized = normalize_label(cue);
        if (!normalized.empty()) cues_.push_back(std::move(normalized));
    }
    std::stable_sort(cues_.begin(), cues_.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

StubBackend StubBackend::fixed(std::vector<Triplet> triples, std::string name) {
    StubBackend stub({}, std::move(name));
    stub.fixed_ = std::move(triples);
    stub.use_fixed_ = true;
    return stub;
}

std::vector<std::string> StubBackend::default_cue_phrases() {
    return {"influenced by", "related to", "leads to", "depends on", "favor",   "favors",
            "supports",      "support",    "opposes",  "oppose",     "shapes",  "shape",
            "promotes",      "promote",    "constrains", "constrain", "mediates", "affects"};
}

std::vector<Triplet> StubBackend::candidates(std::string_view document) {
    if (use_fixed_) return fixed_;

    std::vector<Triplet> out;
    for (auto raw : split_sentences(document)) {
        std::string sentence = collapse_spaces(raw);
        std::string lowered = ascii_lower(sentence);

        std::size_t best_pos = std::string::npos;
        const std::string* best_cue = nullptr;
        for (const auto& cue : cues_) {
            for (std::size_t pos = lowered.find(cue); pos != std::string::npos;
                 pos = lowered.find(cue, pos + 1)) {
                std::size_t end = pos + cue.size();
                bool bounded = (pos == 0 || !is_word_char(lowered[pos - 1])) &&
                               (end == lowered.size() || !is_word_char(lowered[end]));
                if (!bounded) continue;
                // Longer cues come first, so strict `<` keeps them on ties.
                if (pos < best_pos) {
                    best_pos = pos;
                    best_cue = &cue;
                }
                break;
            }
        }
        if (!best_cue) continue;

        auto subject = strip_punct(std::string_view(sentence).substr(0, best_pos));
        auto object = strip_punct(std::string_view(sentence).substr(best_pos + best_cue->size()));
        if (subject.empty() || object.empty()) continue;
        out.push_back(Triplet{std::string(subject), *best_cue, std::string(object), std::nullopt,
                              std::nullopt, 1});
    }
    return out;
}

HttpBackend::HttpBackend(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
    descriptor_.validate();
    auto endpoint = split_endpoint(descriptor_.endpoint);
    origin_ = std::move(endpoint.origin);
    path_ = std::move(endpoint.path);
}

std::vector<Triplet> HttpBackend::candidates(std::string_view document) {
    httplib::Client client(origin_);
    auto ms = descriptor_.timeout.count();
    client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);

    json request = {{"document", std::string(document)}};
    auto response = client.Post(path_, request.dump(), "application/json");
    if (!response) {
        throw Error(ErrorCode::Backend, "request to '" + descriptor_.endpoint +
                                            "' failed: " + httplib::to_string(response.error()));
    }
    if (response->status < 200 || response->status >= 300) {
        throw Error(ErrorCode::Backend, "backend '" + descriptor_.name + "' answered HTTP " +
                                            std::to_string(response->status));
    }
    json body = json::parse(response->body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("triples") || !body["triples"].is_array()) {
        throw Error(ErrorCode::Backend, "backend '" + descriptor_.name + "' returned a malformed body");
    }
    std::vector<Triplet> out;
    for (const auto& item : body["triples"]) out.push_back(triplet_from_response(item));
    return out;
}

std::vector<Triplet> extract_triplets(std::string_view document, ExtractionBackend& backend) {
    if (trim(document).empty()) throw Error(ErrorCode::EmptyDocument, "document is empty");
    auto raw = backend.candidates(document);
    std::vector<Triplet> out;
    out.reserve(raw.size());
    for (auto& t : raw) {
        t.subject = std::string(trim(t.subject));
        t.predicate = normalize_label(t.predicate);
        t.object = std::string(trim(t.object));
        t.source = backend.name();
        if (t.multiplicity == 0) t.multiplicity = 1;
        try {
            validate(t);
        } catch (const Error& e) {
            throw Error(ErrorCode::Backend, "backend '" + backend.name() + "' produced an invalid triple: " + e.what());
        }
        out.push_back(std::move(t));
    }
    return out;
}

LowValueLexicon::LowValueLexicon(std::span<const std::string> terms) {
    for (const auto& term : terms) add(term);
}

LowValueLexicon LowValueLexicon::defaults() {
    LowValueLexicon lexicon;
    lexicon.add("result");
    lexicon.add("study");
    return lexicon;
}

void LowValueLexicon::add(std::string_view term) {
    auto normalized = normalize_label(term);
    if (!normalized.empty()) terms_.insert(std::move(normalized));
}

bool LowValueLexicon::contains(std::string_view label) const {
    return terms_.contains(normalize_label(label));
}

std::vector<Triplet> filter_low_value(std::span<const Triplet> candidates, const LowValueLexicon& lexicon) {
    std::vector<Triplet> out;
    for (const auto& t : candidates) {
        if (lexicon.contains(t.subject) || lexicon.contains(t.object)) continue;
        out.push_back(t);
    }
    return out;
}

Triplet select_preferred(std::span<const Triplet> group) {
    if (group.empty()) throw Error(ErrorCode::EmptyGroup, "cannot select from an empty group");
    const auto subject = normalize_label(group.front().subject);
    const auto predicate = normalize_label(group.front().predicate);

    auto rank = [](const Triplet& t) {
        auto object = normalize_label(t.object);
        return std::make_tuple(token_count(object), object, t.object, t.paper_id.value_or(""),
                               t.source.value_or(""), t.multiplicity, t.subject, t.predicate);
    };

    const Triplet* best = nullptr;
    decltype(rank(group.front())) best_rank;
    for (const auto& t : group) {
        if (normalize_label(t.subject) != subject || normalize_label(t.predicate) != predicate) {
            throw Error(ErrorCode::MixedGroup, "group members must share subject and predicate");
        }
        auto r = rank(t);
        if (!best || r < best_rank) {
            best = &t;
            best_rank = std::move(r);
        }
    }
    return *best;
}

std::vector<Triplet> select_preferred_per_group(std::span<const Triplet> candidates) {
    std::map<std::pair<std::string, std::string>, std::size_t> group_of;
    std::vector<std::vector<Triplet>> groups;
    for (const auto& t : candidates) {
        auto key = std::make_pair(normalize_label(t.subject), normalize_label(t.predicate));
        auto [it, inserted] = group_of.try_emplace(std::move(key), groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(t);
    }
    std::vector<Triplet> out;
    out.reserve(groups.size());
    for (const auto& group : groups) out.push_back(select_preferred(group));
    return out;
}

}  // namespace kgatlas
