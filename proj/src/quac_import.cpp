#include <fstream>
#include <sstream>

#include "json.hpp"
#include "simseek/corpus.hpp"

namespace simseek {

using nlohmann::json;

namespace {

// QuAC appends " CANNOTANSWER" to every context so that unanswerable answers
// have an offset. Unanswerable spans here carry no offset, so it is dropped.
constexpr std::string_view kContextSuffix = " CANNOTANSWER";

std::string sanitize(std::string s) {
    for (char& c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x20 || u == 0x7f) c = ' ';
    }
    return s;
}

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_string()) throw ParseError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return (it != obj.end() && it->is_string()) ? it->get<std::string>() : std::string();
}

const json& array_field(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_array()) throw ParseError(path + "." + key, "expected an array");
    return v;
}

AnswerSpan resolve_answer(const json& answer, const std::string& path, const std::string& passage,
                          std::vector<std::string>& warnings) {
    std::string text = string_field(answer, "text", path);
    if (text == kCannotAnswer) return AnswerSpan::unanswerable();
    const auto& start_v = field(answer, "answer_start", path);
    if (!start_v.is_number_integer()) throw ParseError(path + ".answer_start", "expected an integer");
    const auto start = start_v.get<long long>();

    AnswerSpan span = AnswerSpan::at(text, start < 0 ? 0 : static_cast<std::size_t>(start));
    if (start >= 0 && span_matches(span, passage)) return span;

    const auto found = text.empty() ? std::string::npos : passage.find(text);
    if (found != std::string::npos) {
        warnings.push_back(path + ": answer not at offset " + std::to_string(start) + ", relocated to " +
                           std::to_string(found));
        return AnswerSpan::at(std::move(text), found);
    }
    warnings.push_back(path + ": answer text not found in passage, marked unanswerable");
    return AnswerSpan::unanswerable();
}

}  // namespace

ImportResult import_quac(std::string_view json_text, std::string name) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw ParseError("$", "invalid JSON");

    ImportResult result;
    result.dataset.name = std::move(name);
    result.dataset.provenance = Provenance::human;

    const auto& articles = array_field(root, "data", "$");
    for (std::size_t ai = 0; ai < articles.size(); ++ai) {
        const std::string apath = "$.data[" + std::to_string(ai) + "]";
        const auto& article = articles[ai];
        BackgroundInfo bg;
        bg.title = sanitize(string_field(article, "title", apath));
        bg.section_title = sanitize(optional_string(article, "section_title"));
        bg.abstract = sanitize(optional_string(article, "background"));

        const auto& paragraphs = array_field(article, "paragraphs", apath);
        for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
            const std::string ppath = apath + ".paragraphs[" + std::to_string(pi) + "]";
            const auto& para = paragraphs[pi];
            std::string context = string_field(para, "context", ppath);
            if (context.ends_with(kContextSuffix)) context.resize(context.size() - kContextSuffix.size());
            std::string id = string_field(para, "id", ppath);

            Conversation conv;
            conv.conv_id = id;
            try {
                conv.document = make_document(id, bg, std::move(context));
            } catch (const std::invalid_argument& e) {
                throw ParseError(ppath, e.what());
            }

            const auto& qas = array_field(para, "qas", ppath);
            for (std::size_t qi = 0; qi < qas.size(); ++qi) {
                const std::string qpath = ppath + ".qas[" + std::to_string(qi) + "]";
                const auto& qa = qas[qi];
                QAPair pair;
                pair.turn_index = qi + 1;
                pair.question = string_field(qa, "question", qpath);
                if (pair.question.empty()) throw ParseError(qpath + ".question", "empty question");
                if (qa.contains("orig_answer")) {
                    pair.answer = resolve_answer(qa["orig_answer"], qpath + ".orig_answer", conv.document.passage,
                                                 result.warnings);
                } else {
                    const auto& answers = array_field(qa, "answers", qpath);
                    if (answers.empty()) throw ParseError(qpath + ".answers", "no answers");
                    pair.answer = resolve_answer(answers[0], qpath + ".answers[0]", conv.document.passage,
                                                 result.warnings);
                }
                conv.turns.push_back(std::move(pair));
            }
            result.dataset.conversations.push_back(std::move(conv));
        }
    }
    try {
        validate(result.dataset);
    } catch (const std::invalid_argument& e) {
        throw ParseError("$", e.what());
    }
    return result;
}

ImportResult import_quac_file(const std::string& path, std::string name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return import_quac(buf.str(), std::move(name));
}

}  // namespace simseek
