#pragma once
// Prompt templates are versioned text assets with {named} placeholders.
// "{{" and "}}" render as literal braces; a brace not forming a placeholder
// is left untouched.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace simlearner {

namespace tpl {
inline constexpr std::string_view episodic_consolidation = "episodic_consolidation";
inline constexpr std::string_view metacognition = "metacognition";
inline constexpr std::string_view student_agent = "student_agent";
inline constexpr std::string_view teacher_agent = "teacher_agent";
inline constexpr std::string_view personality_judge = "personality_judge";
inline constexpr std::string_view mastery_judge = "mastery_judge";
inline constexpr std::string_view probe_question = "probe_question";
}  // namespace tpl

struct PromptTemplate {
    std::string name;
    std::string text;
    std::string checksum;

    // Placeholder names in order of first appearance.
    std::vector<std::string> placeholders() const;
};

// Placeholders each known template must contain.
const std::vector<std::string>& required_placeholders(std::string_view name);

class TemplateSet {
public:
    // The assets compiled into the library.
    static TemplateSet builtin();
    // Builtins overridden by any <name>.txt present in `dir`.
    static TemplateSet from_directory(const std::string& dir);

    const PromptTemplate& get(std::string_view name) const;
    void set(std::string name, std::string text);
    std::map<std::string, std::string> checksums() const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

// Throws TemplateError when the template lacks one of its required
// placeholders or uses a placeholder absent from `values`.
std::string render(const PromptTemplate& t, const std::map<std::string, std::string>& values);

}  // namespace simlearner
