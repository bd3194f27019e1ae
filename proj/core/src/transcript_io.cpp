#include <sstream>

#include <nlohmann/json.hpp>

#include "simlearner/dialogue.hpp"
#include "simlearner/errors.hpp"

namespace simlearner {

using nlohmann::json;

namespace {

Termination parse_termination(const std::string& s, const std::string& path) {
    if (s == "teacher_summary") return Termination::teacher_summary;
    if (s == "max_turns") return Termination::max_turns;
    throw SchemaError(path, "unknown termination '" + s + "'");
}

Speaker parse_speaker(const std::string& s, const std::string& path) {
    if (s == "teacher") return Speaker::teacher;
    if (s == "student") return Speaker::student;
    throw SchemaError(path, "unknown speaker '" + s + "'");
}

Outcome parse_outcome(const std::string& s, const std::string& path) {
    if (s == "understood") return Outcome::understood;
    if (s == "exhausted") return Outcome::exhausted;
    throw SchemaError(path, "unknown outcome '" + s + "'");
}

}  // namespace

std::string to_jsonl(const Transcript& t) {
    json header;
    header["type"] = "header";
    header["session_id"] = t.session_id;
    header["student_id"] = t.student_id;
    header["plan"] = {{"unit", t.plan.unit},
                      {"concept", t.plan.concept_id},
                      {"grade", t.plan.grade},
                      {"max_turns", t.plan.max_turns},
                      {"termination", std::string(to_string(t.plan.termination))}};
    header["outcome"] = std::string(to_string(t.outcome));
    header["template_checksums"] = t.template_checksums;
    header["episode_seq"] = t.episode_seq ? json(*t.episode_seq) : json(nullptr);
    header["turn_count"] = t.turns.size();

    std::string out = header.dump() + "\n";
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        const auto& turn = t.turns[i];
        json line = {{"type", "turn"},
                     {"index", i},
                     {"speaker", std::string(to_string(turn.speaker))},
                     {"text", turn.text},
                     {"t", turn.t}};
        out += line.dump() + "\n";
    }
    return out;
}

Transcript parse_transcript(std::string_view jsonl) {
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::vector<json> lines;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw SchemaError("line " + std::to_string(lineno), e.what());
        }
    }
    if (lines.empty()) throw SchemaError("transcript", "empty transcript");

    Transcript t;
    try {
        const auto& h = lines.front();
        if (h.at("type") != "header") throw SchemaError("line 1", "first line must be the header");
        t.session_id = h.at("session_id").get<std::string>();
        t.student_id = h.at("student_id").get<std::string>();
        const auto& p = h.at("plan");
        t.plan.unit = p.at("unit").get<std::string>();
        t.plan.concept_id = p.at("concept").get<std::string>();
        t.plan.grade = p.at("grade").get<int>();
        t.plan.max_turns = p.at("max_turns").get<int>();
        t.plan.termination = parse_termination(p.at("termination").get<std::string>(), "header/plan");
        t.outcome = parse_outcome(h.at("outcome").get<std::string>(), "header");
        t.template_checksums = h.at("template_checksums").get<std::map<std::string, std::string>>();
        if (!h.at("episode_seq").is_null()) t.episode_seq = h.at("episode_seq").get<EpisodeSeq>();
        const auto count = h.at("turn_count").get<std::size_t>();
        if (count != lines.size() - 1)
            throw SchemaError("header", "turn_count " + std::to_string(count) + " but " +
                                            std::to_string(lines.size() - 1) + " turn lines");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto& j = lines[i];
            const std::string path = "turn " + std::to_string(i - 1);
            if (j.at("type") != "turn" || j.at("index").get<std::size_t>() != i - 1)
                throw SchemaError(path, "turn lines must be numbered in order");
            t.turns.push_back({parse_speaker(j.at("speaker").get<std::string>(), path),
                               j.at("text").get<std::string>(), j.at("t").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw SchemaError("transcript", e.what());
    }
    return t;
}

}  // namespace simlearner
