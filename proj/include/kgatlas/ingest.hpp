#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgatlas/model.hpp"

namespace kgatlas {

enum class TripleFormat { Delimited, JsonLines };

struct DelimitedOptions {
    char delimiter = ',';
    bool has_header = false;
};

bool is_valid_utf8(std::string_view bytes) noexcept;

/// Splits delimited text into records. Fields may be wrapped in double quotes;
/// inside quotes the delimiter and line breaks are literal and `""` is a quote.
/// Blank lines are skipped. Never throws on malformed quoting: an unterminated
/// quote runs to the end of input.
std::vector<std::vector<std::string>> read_delimited(std::string_view text, char delimiter);

/// Quotes `field` only when it contains the delimiter, a quote or a line break.
std::string quote_field(std::string_view field, char delimiter);

struct TripleParseResult {
    std::vector<Triplet> triples;
    std::size_t triples_read = 0;
    std::size_t rows_rejected = 0;
    std::vector<std::string> warnings;
};

/// Delimited columns: subject, predicate, object, [paper_id], [source],
/// [multiplicity]. JSON lines use the same names as keys. Predicates are
/// normalized, subjects and objects trimmed. Bad rows are counted and skipped;
/// only invalid UTF-8 (E_ENCODING) is fatal.
TripleParseResult parse_triplets(std::string_view input, TripleFormat format,
                                 const DelimitedOptions& options = {});

/// Inverse of the delimited parser; always writes all six columns.
std::string serialize_triplets(std::span<const Triplet> triples, char delimiter = ',');

/// Two columns: relation label, alias.
AbbrevTable parse_abbreviations(std::string_view input, const DelimitedOptions& options = {});

/// Two columns: variant, canonical. The result is validated before returning.
MergeMap parse_merge_map(std::string_view input, const DelimitedOptions& options = {});

struct IntegrityReport {
    std::vector<std::string> missing_abbreviations;  // sorted, unique, normalized
    std::vector<std::string> warnings;
    std::size_t triples_read = 0;
    std::size_t rows_rejected = 0;
};

/// Flags every distinct predicate without an abbreviation. Never fails.
IntegrityReport check_integrity(std::span<const Triplet> triples, const AbbrevTable& abbrev);

struct MetadataOptions {
    int min_year = 1996;
    int max_year = 2019;
    bool strict = false;  // out-of-range years become E_YEAR_RANGE instead of warnings
    DelimitedOptions delimited;
};

struct MetadataParseResult {
    std::vector<PaperRecord> records;
    std::size_t rows_rejected = 0;
    std::vector<std::string> warnings;
};

/// Delimited columns: paper_id, title, year, journal, authors, institutions;
/// the last two are `;`-separated lists. JSON lines use the same keys with
/// arrays for the lists. Throws E_DUP_PAPER_ID, and E_YEAR_RANGE in strict mode.
MetadataParseResult parse_paper_metadata(std::string_view input, TripleFormat format,
                                         const MetadataOptions& options = {});

/// Lexicon files: one term per line; blank lines and `#` comments ignored.
std::vector<std::string> parse_term_list(std::string_view input);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace kgatlas
