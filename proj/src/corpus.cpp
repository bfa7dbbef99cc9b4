#include "simseek/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace simseek {

using nlohmann::json;

namespace {

bool has_control_chars(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u < 0x20 || u == 0x7f;
    });
}

}  // namespace

std::size_t whitespace_token_count(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

Document make_document(std::string doc_id, BackgroundInfo background, std::string passage) {
    Document doc;
    doc.doc_id = std::move(doc_id);
    doc.background = std::move(background);
    doc.passage = std::move(passage);
    doc.word_count = whitespace_token_count(doc.passage);
    validate(doc);
    return doc;
}

void validate(const Document& doc) {
    if (doc.doc_id.empty()) throw std::invalid_argument("document has empty doc_id");
    if (doc.passage.empty()) throw std::invalid_argument("document " + doc.doc_id + " has empty passage");
    if (doc.background.title.empty()) throw std::invalid_argument("document " + doc.doc_id + " has empty title");
    const auto& b = doc.background;
    if (has_control_chars(b.title) || has_control_chars(b.section_title) || has_control_chars(b.abstract))
        throw std::invalid_argument("document " + doc.doc_id + " background contains control characters");
    if (doc.word_count != whitespace_token_count(doc.passage))
        throw std::invalid_argument("document " + doc.doc_id + " word_count does not match passage");
}

bool span_matches(const AnswerSpan& span, std::string_view passage) {
    if (span.is_unanswerable) return span.text == kCannotAnswer && !span.start.has_value();
    if (!span.start || span.text.empty()) return false;
    if (*span.start > passage.size() || passage.size() - *span.start < span.text.size()) return false;
    return passage.substr(*span.start, span.text.size()) == span.text;
}

void validate(const Conversation& conv) {
    for (std::size_t i = 0; i < conv.turns.size(); ++i) {
        const auto& turn = conv.turns[i];
        const std::string where = "conversation " + conv.conv_id + " turn " + std::to_string(i + 1);
        if (turn.turn_index != i + 1) throw std::invalid_argument(where + ": turn indices must be consecutive from 1");
        if (turn.question.empty()) throw std::invalid_argument(where + ": empty question");
        if (!span_matches(turn.answer, conv.document.passage))
            throw std::invalid_argument(where + ": answer span does not match passage");
    }
}

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::human: return "human";
        case Provenance::synthetic_sym: return "synthetic-sym";
        case Provenance::synthetic_asym: return "synthetic-asym";
        case Provenance::imported: return "imported";
    }
    return "imported";
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "human") return Provenance::human;
    if (s == "synthetic-sym") return Provenance::synthetic_sym;
    if (s == "synthetic-asym") return Provenance::synthetic_asym;
    if (s == "imported") return Provenance::imported;
    throw std::invalid_argument("unknown provenance: " + std::string(s));
}

void validate(const Dataset& dataset) {
    std::unordered_set<std::string> seen;
    for (const auto& conv : dataset.conversations) {
        if (!seen.insert(conv.conv_id).second)
            throw std::invalid_argument("duplicate conv_id in dataset " + dataset.name + ": " + conv.conv_id);
        validate(conv.document);
        validate(conv);
    }
}

// ---------------------------------------------------------------------------
// Canonical format

namespace {

json document_json(const Document& doc) {
    return json{{"doc_id", doc.doc_id},
                {"title", doc.background.title},
                {"section_title", doc.background.section_title},
                {"abstract", doc.background.abstract},
                {"passage", doc.passage}};
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where, std::string("missing field '") + key + "'");
    try {
        return it->template get<T>();
    } catch (const json::exception&) {
        throw ParseError(where, std::string("field '") + key + "' has the wrong type");
    }
}

Document document_from_json(const json& j, const std::string& where) {
    BackgroundInfo bg{required<std::string>(j, "title", where), required<std::string>(j, "section_title", where),
                      required<std::string>(j, "abstract", where)};
    try {
        return make_document(required<std::string>(j, "doc_id", where), std::move(bg),
                             required<std::string>(j, "passage", where));
    } catch (const std::invalid_argument& e) {
        throw ParseError(where, e.what());
    }
}

}  // namespace

std::string to_canonical_line(const Conversation& conv) {
    json turns = json::array();
    for (const auto& t : conv.turns) {
        turns.push_back(json{{"t", t.turn_index},
                             {"q", t.question},
                             {"a", t.answer.text},
                             {"start", t.answer.start ? json(*t.answer.start) : json(nullptr)},
                             {"unanswerable", t.answer.is_unanswerable}});
    }
    json j{{"conv_id", conv.conv_id}, {"doc", document_json(conv.document)}, {"turns", std::move(turns)}};
    return j.dump();
}

Conversation from_canonical_line(std::string_view line, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(where, "invalid JSON");
    Conversation conv;
    conv.conv_id = required<std::string>(j, "conv_id", where);
    if (!j.contains("doc")) throw ParseError(where, "missing field 'doc'");
    conv.document = document_from_json(j["doc"], where);
    const auto turns = required<json>(j, "turns", where);
    if (!turns.is_array()) throw ParseError(where, "field 'turns' must be an array");
    for (const auto& t : turns) {
        QAPair pair;
        pair.turn_index = required<std::size_t>(t, "t", where);
        pair.question = required<std::string>(t, "q", where);
        pair.answer.text = required<std::string>(t, "a", where);
        pair.answer.is_unanswerable = required<bool>(t, "unanswerable", where);
        const auto start = required<json>(t, "start", where);
        if (!start.is_null()) {
            if (!start.is_number_unsigned()) throw ParseError(where, "field 'start' must be a non-negative integer or null");
            pair.answer.start = start.get<std::size_t>();
        }
        conv.turns.push_back(std::move(pair));
    }
    try {
        validate(conv);
    } catch (const std::invalid_argument& e) {
        throw ParseError(where, e.what());
    }
    return conv;
}

void write_canonical(std::ostream& out, const Dataset& dataset) {
    for (const auto& conv : dataset.conversations) out << to_canonical_line(conv) << '\n';
}

Dataset read_canonical(std::istream& in, std::string name, Provenance provenance) {
    Dataset ds;
    ds.name = std::move(name);
    ds.provenance = provenance;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto conv = from_canonical_line(line, line_no);
        if (!seen.insert(conv.conv_id).second)
            throw ParseError("line " + std::to_string(line_no), "duplicate conv_id " + conv.conv_id);
        ds.conversations.push_back(std::move(conv));
    }
    return ds;
}

Dataset read_canonical_file(const std::string& path, Provenance provenance) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return read_canonical(in, path, provenance);
}

void write_canonical_file(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    write_canonical(out, dataset);
    if (!out) throw std::ios_base::failure("write failed for " + path);
}

std::string to_document_line(const Document& doc) { return document_json(doc).dump(); }

std::vector<Document> read_documents(std::istream& in) {
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no);
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(where, "invalid JSON");
        if (j.is_object() && j.contains("doc")) {
            docs.push_back(document_from_json(j["doc"], where));
        } else {
            docs.push_back(document_from_json(j, where));
        }
    }
    return docs;
}

std::vector<Document> read_documents_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    return read_documents(in);
}

// ---------------------------------------------------------------------------
// Splits and filters

std::vector<Dataset> split_dataset(const Dataset& dataset, const std::vector<SplitSpec>& specs) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < dataset.conversations.size(); ++i) index.emplace(dataset.conversations[i].conv_id, i);

    std::unordered_map<std::string, std::string> owner;
    for (const auto& spec : specs) {
        for (const auto& id : spec.conv_ids) {
            if (!index.contains(id)) throw std::invalid_argument("split " + spec.name + ": unknown conv_id " + id);
            auto [it, inserted] = owner.emplace(id, spec.name);
            if (!inserted)
                throw std::invalid_argument("conv_id " + id + " appears in splits " + it->second + " and " + spec.name);
        }
    }

    std::vector<Dataset> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) {
        Dataset part;
        part.name = spec.name;
        part.provenance = dataset.provenance;
        // Preserve the source order rather than the set order.
        for (const auto& conv : dataset.conversations)
            if (spec.conv_ids.contains(conv.conv_id)) part.conversations.push_back(conv);
        out.push_back(std::move(part));
    }
    return out;
}

std::vector<Document> filter_passages_by_length(const std::vector<Document>& documents, std::size_t min_words,
                                                std::size_t max_words) {
    if (min_words > max_words) throw std::invalid_argument("min_words must not exceed max_words");
    std::vector<Document> kept;
    std::copy_if(documents.begin(), documents.end(), std::back_inserter(kept), [&](const Document& d) {
        return d.word_count >= min_words && d.word_count <= max_words;
    });
    return kept;
}

}  // namespace simseek
