#include "simlearner/templates.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "embedded.hpp"
#include "simlearner/checksum.hpp"
#include "simlearner/errors.hpp"

namespace simlearner {

namespace {

bool ident_start(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
    return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

// Length of the placeholder starting at text[i] == '{', or 0 if none.
std::size_t placeholder_at(std::string_view text, std::size_t i) {
    if (i + 2 >= text.size() || !ident_start(text[i + 1])) return 0;
    std::size_t j = i + 1;
    while (j < text.size() && ident_char(text[j])) ++j;
    return j < text.size() && text[j] == '}' ? j - i + 1 : 0;
}

PromptTemplate make_template(std::string name, std::string text) {
    PromptTemplate t{std::move(name), std::move(text), {}};
    t.checksum = checksum_hex(t.text);
    return t;
}

const std::vector<std::string> kTemplateNames = {
    std::string(tpl::episodic_consolidation), std::string(tpl::metacognition),
    std::string(tpl::student_agent),          std::string(tpl::teacher_agent),
    std::string(tpl::personality_judge),      std::string(tpl::mastery_judge),
    std::string(tpl::probe_question)};

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
    std::vector<std::string> out;
    std::string_view s = text;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '{' && i + 1 < s.size() && s[i + 1] == '{') {
            ++i;
            continue;
        }
        if (s[i] != '{') continue;
        if (auto len = placeholder_at(s, i)) {
            std::string name(s.substr(i + 1, len - 2));
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
            i += len - 1;
        }
    }
    return out;
}

const std::vector<std::string>& required_placeholders(std::string_view name) {
    static const std::map<std::string, std::vector<std::string>, std::less<>> table = {
        {std::string(tpl::episodic_consolidation), {"one_dialogue_content", "all_concept_list_with_idx"}},
        {std::string(tpl::metacognition), {"grade_level", "subject", "recent_episodes"}},
        {std::string(tpl::student_agent),
         {"grade_level", "personality_context", "skill_context", "recent_episodes", "conceptual_context"}},
        {std::string(tpl::teacher_agent), {"grade_level", "current_concept"}},
        {std::string(tpl::personality_judge), {"one_dialogue_content"}},
        {std::string(tpl::mastery_judge), {"grade_level", "core_idea", "question", "answer"}},
        {std::string(tpl::probe_question), {"outcome"}},
    };
    static const std::vector<std::string> none;
    auto it = table.find(name);
    return it == table.end() ? none : it->second;
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    const auto& assets = detail::embedded_assets();
    for (const auto& name : kTemplateNames) set.set(name, std::string(assets.at(name)));
    return set;
}

TemplateSet TemplateSet::from_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw TemplateError("template directory not found: " + dir);
    TemplateSet set = builtin();
    for (const auto& name : kTemplateNames) {
        fs::path p = fs::path(dir) / (name + ".txt");
        if (!fs::exists(p)) continue;
        std::ifstream in(p, std::ios::binary);
        set.set(name, std::string{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()});
    }
    return set;
}

const PromptTemplate& TemplateSet::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw TemplateError("unknown template '" + std::string(name) + "'");
    return it->second;
}

void TemplateSet::set(std::string name, std::string text) {
    auto key = name;
    templates_.insert_or_assign(std::move(key), make_template(std::move(name), std::move(text)));
}

std::map<std::string, std::string> TemplateSet::checksums() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, t] : templates_) out[name] = t.checksum;
    return out;
}

std::string render(const PromptTemplate& t, const std::map<std::string, std::string>& values) {
    const auto present = t.placeholders();
    for (const auto& required : required_placeholders(t.name)) {
        if (std::find(present.begin(), present.end(), required) == present.end())
            throw TemplateError("template '" + t.name + "' is missing placeholder {" + required + "}");
    }

    std::string out;
    std::string_view s = t.text;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if ((c == '{' || c == '}') && i + 1 < s.size() && s[i + 1] == c) {
            out.push_back(c);
            ++i;
            continue;
        }
        if (c == '{') {
            if (auto len = placeholder_at(s, i)) {
                std::string name(s.substr(i + 1, len - 2));
                auto it = values.find(name);
                if (it == values.end())
                    throw TemplateError("no value for placeholder {" + name + "} in template '" + t.name + "'");
                out += it->second;
                i += len - 1;
                continue;
            }
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace simlearner
