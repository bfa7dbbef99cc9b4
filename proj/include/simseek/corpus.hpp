#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simseek {

inline constexpr std::string_view kCannotAnswer = "CANNOTANSWER";

/// Raised for schema violations. `where` is a JSON path or "line N".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

struct BackgroundInfo {
    std::string title;
    std::string section_title;
    std::string abstract;  // lead description of the article

    bool operator==(const BackgroundInfo&) const = default;
};

struct Document {
    std::string doc_id;
    BackgroundInfo background;
    std::string passage;
    std::size_t word_count = 0;

    bool operator==(const Document&) const = default;
};

/// Builds a Document, computing word_count and enforcing its invariants.
Document make_document(std::string doc_id, BackgroundInfo background, std::string passage);

/// Throws std::invalid_argument when a Document invariant does not hold.
void validate(const Document& doc);

struct AnswerSpan {
    std::string text;
    std::optional<std::size_t> start;  // nullopt is the "no-span" value
    bool is_unanswerable = false;

    static AnswerSpan unanswerable() { return {std::string(kCannotAnswer), std::nullopt, true}; }
    static AnswerSpan at(std::string text, std::size_t start) { return {std::move(text), start, false}; }

    bool operator==(const AnswerSpan&) const = default;
};

/// True when the span satisfies its invariants against `passage`.
bool span_matches(const AnswerSpan& span, std::string_view passage);

struct QAPair {
    std::size_t turn_index = 1;
    std::string question;
    AnswerSpan answer;

    bool operator==(const QAPair&) const = default;
};

struct Conversation {
    std::string conv_id;
    Document document;
    std::vector<QAPair> turns;

    bool operator==(const Conversation&) const = default;
};

/// Throws std::invalid_argument on non-consecutive turns, empty questions or
/// spans that do not verify against the passage.
void validate(const Conversation& conv);

enum class Provenance { human, synthetic_sym, synthetic_asym, imported };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Dataset {
    std::string name;
    std::vector<Conversation> conversations;
    Provenance provenance = Provenance::imported;

    bool operator==(const Dataset&) const = default;
};

/// Throws std::invalid_argument on duplicate conv_ids or invalid conversations.
void validate(const Dataset& dataset);

// ---------------------------------------------------------------------------
// QuAC import

struct ImportResult {
    Dataset dataset;
    std::vector<std::string> warnings;
};

/// Imports the official QuAC distribution JSON (data -> paragraphs -> qas).
/// One Conversation per paragraph. Mismatched spans are relocated to their
/// first occurrence, or marked unanswerable when absent; each repair adds a
/// warning.
ImportResult import_quac(std::string_view json_text, std::string name = "quac");
ImportResult import_quac_file(const std::string& path, std::string name = "quac");

// ---------------------------------------------------------------------------
// Canonical line-delimited format

/// Serializes one conversation as a single JSON line (keys sorted, no newline).
std::string to_canonical_line(const Conversation& conv);
Conversation from_canonical_line(std::string_view line, std::size_t line_no = 0);

void write_canonical(std::ostream& out, const Dataset& dataset);
Dataset read_canonical(std::istream& in, std::string name = "dataset",
                       Provenance provenance = Provenance::imported);

Dataset read_canonical_file(const std::string& path, Provenance provenance = Provenance::imported);
void write_canonical_file(const std::string& path, const Dataset& dataset);

/// Reads documents, one JSON object per line. Accepts bare document records
/// ({doc_id, title, section_title, abstract, passage}) and canonical
/// conversation records (whose "doc" object is used).
std::vector<Document> read_documents(std::istream& in);
std::vector<Document> read_documents_file(const std::string& path);
std::string to_document_line(const Document& doc);

// ---------------------------------------------------------------------------
// Splits and filters

struct SplitSpec {
    std::string name;
    std::set<std::string> conv_ids;
};

/// Returns one dataset per spec, in spec order, each named after its split.
/// Throws std::invalid_argument on unknown ids or overlapping specs.
std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<SplitSpec>& specs);

/// Keeps documents with min_words <= word_count <= max_words.
std::vector<Document> filter_passages_by_length(const std::vector<Document>& documents,
                                                std::size_t min_words, std::size_t max_words);

/// Number of whitespace-separated tokens.
std::size_t whitespace_token_count(std::string_view text);

}  // namespace simseek
