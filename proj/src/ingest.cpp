#include "kgatlas/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "kgatlas/error.hpp"

namespace kgatlas {

using nlohmann::json;

namespace {

std::string_view strip_bom(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    return text;
}

void require_utf8(std::string_view input) {
    if (!is_valid_utf8(input)) {
        throw Error(ErrorCode::Encoding, "input is not valid UTF-8");
    }
}

std::optional<std::string> optional_field(const std::vector<std::string>& row, std::size_t i) {
    if (i >= row.size()) return std::nullopt;
    auto value = trim(row[i]);
    if (value.empty()) return std::nullopt;
    return std::string(value);
}

std::optional<std::uint64_t> parse_count(std::string_view text) {
    text = trim(text);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) return std::nullopt;
    return value;
}

std::optional<std::string> json_optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorCode::BadField, std::string("'") + key + "' must be a string");
    auto value = trim(it->get_ref<const std::string&>());
    if (value.empty()) return std::nullopt;
    return std::string(value);
}

std::string json_required_string(const json& obj, const char* key) {
    auto value = json_optional_string(obj, key);
    if (!value) throw Error(ErrorCode::RowArity, std::string("missing '") + key + "'");
    return *value;
}

Triplet triplet_from_row(const std::vector<std::string>& row) {
    if (row.size() < 3) {
        throw Error(ErrorCode::RowArity,
                    "expected at least 3 fields, got " + std::to_string(row.size()));
    }
    if (row.size() > 6) {
        throw Error(ErrorCode::RowArity, "expected at most 6 fields, got " + std::to_string(row.size()));
    }
    Triplet t;
    t.subject = std::string(trim(row[0]));
    t.predicate = normalize_label(row[1]);
    t.object = std::string(trim(row[2]));
    t.paper_id = optional_field(row, 3);
    t.source = optional_field(row, 4);
    if (row.size() > 5 && !trim(row[5]).empty()) {
        auto count = parse_count(row[5]);
        if (!count) throw Error(ErrorCode::BadField, "multiplicity must be a positive integer");
        t.multiplicity = *count;
    }
    validate(t);
    return t;
}

Triplet triplet_from_json(std::string_view line) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw Error(ErrorCode::BadField, "line is not a JSON object");
    }
    Triplet t;
    t.subject = json_required_string(obj, "subject");
    t.predicate = normalize_label(json_required_string(obj, "predicate"));
    t.object = json_required_string(obj, "object");
    t.paper_id = json_optional_string(obj, "paper_id");
    t.source = json_optional_string(obj, "source");
    if (auto it = obj.find("multiplicity"); it != obj.end() && !it->is_null()) {
        if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0) {
            throw Error(ErrorCode::BadField, "multiplicity must be a positive integer");
        }
        t.multiplicity = it->get<std::uint64_t>();
    }
    validate(t);
    return t;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (trim(line).empty()) continue;
        fn(line_no, line);
    }
}

std::vector<std::vector<std::string>> table_rows(std::string_view input, const DelimitedOptions& options) {
    require_utf8(input);
    auto rows = read_delimited(strip_bom(input), options.delimiter);
    if (options.has_header && !rows.empty()) rows.erase(rows.begin());
    return rows;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    while (true) {
        auto pos = text.find(';');
        auto item = trim(text.substr(0, pos));
        if (!item.empty()) out.emplace_back(item);
        if (pos == std::string_view::npos) break;
        text.remove_prefix(pos + 1);
    }
    return out;
}

std::vector<std::string> json_string_list(const json& obj, const char* key) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return out;
    if (it->is_string()) return split_list(it->get_ref<const std::string&>());
    if (!it->is_array()) throw Error(ErrorCode::BadField, std::string("'") + key + "' must be a list");
    for (const auto& item : *it) {
        if (!item.is_string()) throw Error(ErrorCode::BadField, std::string("'") + key + "' must hold strings");
        auto value = trim(item.get_ref<const std::string&>());
        if (!value.empty()) out.emplace_back(value);
    }
    return out;
}

int parse_year(std::string_view text) {
    text = trim(text);
    int year = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::BadField, "year '" + std::string(text) + "' is not an integer");
    }
    return year;
}

PaperRecord paper_from_row(const std::vector<std::string>& row) {
    if (row.size() < 3) {
        throw Error(ErrorCode::RowArity,
                    "expected at least 3 fields (paper_id, title, year), got " + std::to_string(row.size()));
    }
    PaperRecord p;
    p.paper_id = std::string(trim(row[0]));
    if (p.paper_id.empty()) throw Error(ErrorCode::BadField, "empty paper_id");
    p.title = std::string(trim(row[1]));
    p.year = parse_year(row[2]);
    if (row.size() > 3) p.journal = std::string(trim(row[3]));
    if (row.size() > 4) p.authors = split_list(row[4]);
    if (row.size() > 5) p.institutions = split_list(row[5]);
    return p;
}

PaperRecord paper_from_json(std::string_view line) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw Error(ErrorCode::BadField, "line is not a JSON object");
    }
    PaperRecord p;
    p.paper_id = json_required_string(obj, "paper_id");
    p.title = json_optional_string(obj, "title").value_or("");
    auto year = obj.find("year");
    if (year == obj.end() || !year->is_number_integer()) {
        throw Error(ErrorCode::BadField, "'year' must be an integer");
    }
    p.year = year->get<int>();
    p.journal = json_optional_string(obj, "journal").value_or("");
    p.authors = json_string_list(obj, "authors");
    p.institutions = json_string_list(obj, "institutions");
    return p;
}

}  // namespace

bool is_valid_utf8(std::string_view bytes) noexcept {
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        auto c = static_cast<unsigned char>(bytes[i]);
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::uint32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

std::vector<std::vector<std::string>> read_delimited(std::string_view text, char delimiter) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // anything seen for this row, including quotes

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        if (field_started) {
            end_field();
            bool blank = std::all_of(row.begin(), row.end(),
                                     [](const std::string& f) { return trim(f).empty(); });
            if (!(row.size() == 1 && blank)) rows.push_back(std::move(row));
        }
        row.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && trim(field).empty()) {
            field.clear();
            in_quotes = true;
            field_started = true;
        } else if (c == delimiter) {
            field_started = true;
            end_field();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_row();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    end_row();
    return rows;
}

std::string quote_field(std::string_view field, char delimiter) {
    bool needs = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

TripleParseResult parse_triplets(std::string_view input, TripleFormat format, const DelimitedOptions& options) {
    require_utf8(input);
    input = strip_bom(input);
    TripleParseResult result;

    auto reject = [&](std::size_t row_no, const Error& e) {
        ++result.rows_rejected;
        result.warnings.push_back("row " + std::to_string(row_no) + " rejected: " + e.what());
    };

    if (format == TripleFormat::JsonLines) {
        for_each_line(input, [&](std::size_t line_no, std::string_view line) {
            try {
                result.triples.push_back(triplet_from_json(line));
            } catch (const Error& e) {
                reject(line_no, e);
            }
        });
    } else {
        auto rows = read_delimited(input, options.delimiter);
        std::size_t first = (options.has_header && !rows.empty()) ? 1 : 0;
        for (std::size_t i = first; i < rows.size(); ++i) {
            try {
                result.triples.push_back(triplet_from_row(rows[i]));
            } catch (const Error& e) {
                reject(i + 1, e);
            }
        }
    }
    result.triples_read = result.triples.size();
    return result;
}

std::string serialize_triplets(std::span<const Triplet> triples, char delimiter) {
    std::string out;
    for (const auto& t : triples) {
        out += quote_field(t.subject, delimiter);
        out += delimiter;
        out += quote_field(t.predicate, delimiter);
        out += delimiter;
        out += quote_field(t.object, delimiter);
        out += delimiter;
        out += quote_field(t.paper_id.value_or(""), delimiter);
        out += delimiter;
        out += quote_field(t.source.value_or(""), delimiter);
        out += delimiter;
        out += std::to_string(t.multiplicity);
        out += '\n';
    }
    return out;
}

AbbrevTable parse_abbreviations(std::string_view input, const DelimitedOptions& options) {
    AbbrevTable table;
    std::size_t row_no = 0;
    for (const auto& row : table_rows(input, options)) {
        ++row_no;
        if (row.size() != 2) {
            throw Error(ErrorCode::RowArity, "abbreviation row " + std::to_string(row_no) +
                                                 " must have 2 fields, got " + std::to_string(row.size()));
        }
        table.add(row[0], row[1]);
    }
    return table;
}

MergeMap parse_merge_map(std::string_view input, const DelimitedOptions& options) {
    MergeMap map;
    std::size_t row_no = 0;
    for (const auto& row : table_rows(input, options)) {
        ++row_no;
        if (row.size() != 2) {
            throw Error(ErrorCode::RowArity, "merge map row " + std::to_string(row_no) +
                                                 " must have 2 fields, got " + std::to_string(row.size()));
        }
        map.add(row[0], row[1]);
    }
    map.validate();
    return map;
}

IntegrityReport check_integrity(std::span<const Triplet> triples, const AbbrevTable& abbrev) {
    IntegrityReport report;
    report.triples_read = triples.size();
    std::set<std::string> missing;
    for (const auto& t : triples) {
        auto label = normalize_label(t.predicate);
        if (!abbrev.contains(label)) missing.insert(std::move(label));
    }
    for (const auto& label : missing) {
        report.warnings.push_back("relation '" + label +
                                  "' has no abbreviation; flagged for manual inspection");
    }
    report.missing_abbreviations.assign(missing.begin(), missing.end());
    return report;
}

MetadataParseResult parse_paper_metadata(std::string_view input, TripleFormat format,
                                         const MetadataOptions& options) {
    require_utf8(input);
    input = strip_bom(input);
    MetadataParseResult result;
    std::unordered_set<std::string> seen;

    auto accept = [&](PaperRecord record) {
        if (!seen.insert(record.paper_id).second) {
            throw Error(ErrorCode::DupPaperId, "paper_id '" + record.paper_id + "' appears more than once");
        }
        if (record.year < options.min_year || record.year > options.max_year) {
            std::string msg = "paper '" + record.paper_id + "' has year " + std::to_string(record.year) +
                              " outside " + std::to_string(options.min_year) + "-" +
                              std::to_string(options.max_year);
            if (options.strict) throw Error(ErrorCode::YearRange, msg);
            result.warnings.push_back(msg);
        }
        result.records.push_back(std::move(record));
    };
    auto reject = [&](std::size_t row_no, const Error& e) {
        ++result.rows_rejected;
        result.warnings.push_back("row " + std::to_string(row_no) + " rejected: " + e.what());
    };

    if (format == TripleFormat::JsonLines) {
        for_each_line(input, [&](std::size_t line_no, std::string_view line) {
            PaperRecord record;
            try {
                record = paper_from_json(line);
            } catch (const Error& e) {
                reject(line_no, e);
                return;
            }
            accept(std::move(record));
        });
    } else {
        auto rows = read_delimited(input, options.delimited.delimiter);
        std::size_t first = (options.delimited.has_header && !rows.empty()) ? 1 : 0;
        for (std::size_t i = first; i < rows.size(); ++i) {
            PaperRecord record;
            try {
                record = paper_from_row(rows[i]);
            } catch (const Error& e) {
                reject(i + 1, e);
                continue;
            }
            accept(std::move(record));
        }
    }
    return result;
}

std::vector<std::string> parse_term_list(std::string_view input) {
    require_utf8(input);
    input = strip_bom(input);
    std::vector<std::string> terms;
    for_each_line(input, [&](std::size_t, std::string_view line) {
        auto term = trim(line);
        if (term.starts_with('#')) return;
        terms.emplace_back(term);
    });
    return terms;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

}  // namespace kgatlas
