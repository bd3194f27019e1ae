#include "simlearner/curriculum.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded.hpp"
#include "simlearner/errors.hpp"

namespace simlearner {

using nlohmann::json;

namespace {

constexpr std::string_view kSubjectCodes[] = {"ESS", "ETS", "LS", "PS"};

bool known_subject_code(std::string_view code) {
    return std::find(std::begin(kSubjectCodes), std::end(kSubjectCodes), code) !=
           std::end(kSubjectCodes);
}

template <typename T>
void sort_by_id(std::vector<T>& v) {
    std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

// Structural helpers: every object has exactly the expected keys.
void expect_keys(const json& obj, const std::string& path,
                 std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw SchemaError(path, "expected an object");
    for (auto key : keys) {
        if (!obj.contains(std::string(key)))
            throw SchemaError(path, "missing key '" + std::string(key) + "'");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw SchemaError(path, "unknown key '" + key + "'");
    }
}

std::string get_string(const json& obj, const std::string& path, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw SchemaError(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

const json& get_array(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_array()) throw SchemaError(std::string("/") + key, "expected an array");
    return v;
}

}  // namespace

void check_grade(int g) {
    if (g < kMinGrade || g > kMaxGrade)
        throw DomainError("grade " + std::to_string(g) + " outside " +
                          std::to_string(kMinGrade) + ".." + std::to_string(kMaxGrade));
}

Curriculum::Curriculum(std::string version, std::vector<Subject> subjects,
                       std::vector<Concept> concepts, std::vector<LearningUnit> units)
    : version_(std::move(version)),
      subjects_(std::move(subjects)),
      concepts_(std::move(concepts)),
      units_(std::move(units)) {
    std::stable_sort(subjects_.begin(), subjects_.end(),
                     [](const Subject& a, const Subject& b) { return a.code < b.code; });
    sort_by_id(concepts_);
    sort_by_id(units_);
}

const Concept* Curriculum::find_concept(std::string_view id) const {
    auto it = std::lower_bound(concepts_.begin(), concepts_.end(), id,
                               [](const Concept& c, std::string_view v) { return c.id < v; });
    return it != concepts_.end() && it->id == id ? &*it : nullptr;
}

const LearningUnit* Curriculum::find_unit(std::string_view id) const {
    auto it = std::lower_bound(units_.begin(), units_.end(), id,
                               [](const LearningUnit& u, std::string_view v) { return u.id < v; });
    return it != units_.end() && it->id == id ? &*it : nullptr;
}

const Subject* Curriculum::find_subject(std::string_view code) const {
    for (const auto& s : subjects_)
        if (s.code == code) return &s;
    return nullptr;
}

int Curriculum::concept_grade(std::string_view id) const {
    int best = 0;
    for (const auto& u : units_) {
        if (u.concept_id == id && (best == 0 || u.grade < best)) best = u.grade;
    }
    return best;
}

std::vector<const LearningUnit*> Curriculum::units_of_concept(std::string_view id) const {
    std::vector<const LearningUnit*> out;
    for (const auto& u : units_)
        if (u.concept_id == id) out.push_back(&u);
    return out;
}

bool Curriculum::operator==(const Curriculum& other) const {
    return version_ == other.version_ && subjects_ == other.subjects_ &&
           concepts_ == other.concepts_ && units_ == other.units_;
}

Curriculum parse_curriculum(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SchemaError("line " + std::to_string(line_of(text, e.byte)), e.what());
    }

    expect_keys(doc, "", {"version", "subjects", "concepts", "units"});
    std::string version = get_string(doc, "", "version");

    std::vector<Subject> subjects;
    const auto& jsubjects = get_array(doc, "subjects");
    for (std::size_t i = 0; i < jsubjects.size(); ++i) {
        const std::string path = "/subjects/" + std::to_string(i);
        expect_keys(jsubjects[i], path, {"code", "name"});
        subjects.push_back({get_string(jsubjects[i], path, "code"), get_string(jsubjects[i], path, "name")});
    }

    std::vector<Concept> concepts;
    const auto& jconcepts = get_array(doc, "concepts");
    for (std::size_t i = 0; i < jconcepts.size(); ++i) {
        const std::string path = "/concepts/" + std::to_string(i);
        expect_keys(jconcepts[i], path, {"id", "desc", "subject"});
        concepts.push_back({get_string(jconcepts[i], path, "id"),
                            get_string(jconcepts[i], path, "desc"),
                            get_string(jconcepts[i], path, "subject")});
    }

    std::vector<LearningUnit> units;
    const auto& junits = get_array(doc, "units");
    for (std::size_t i = 0; i < junits.size(); ++i) {
        const std::string path = "/units/" + std::to_string(i);
        const auto& ju = junits[i];
        expect_keys(ju, path, {"id", "core_idea", "outcome", "grade", "concept"});
        if (!ju.at("grade").is_number_integer())
            throw SchemaError(path + "/grade", "expected an integer");
        LearningUnit u{get_string(ju, path, "id"), get_string(ju, path, "core_idea"),
                       get_string(ju, path, "outcome"), ju.at("grade").get<int>(),
                       get_string(ju, path, "concept")};
        units.push_back(std::move(u));
    }
    return Curriculum(std::move(version), std::move(subjects), std::move(concepts), std::move(units));
}

Curriculum load_curriculum(std::string_view text) {
    Curriculum c = parse_curriculum(text);
    for (const auto& s : c.subjects()) {
        if (!known_subject_code(s.code))
            throw DomainError("/subjects/" + s.code + ": unknown subject code '" + s.code + "'");
    }
    for (const auto& u : c.units()) {
        if (u.grade < kMinGrade || u.grade > kMaxGrade)
            throw DomainError("/units/" + u.id + "/grade: grade " + std::to_string(u.grade) + " outside 1..5");
    }

    for (const auto& k : c.concepts()) {
        if (!c.find_subject(k.subject))
            throw ReferenceError("/concepts/" + k.id + "/subject: unknown subject '" +
                                 k.subject + "'");
    }
    for (const auto& unit : c.units()) {
        if (!c.find_concept(unit.concept_id))
            throw ReferenceError("/units/" + unit.id + "/concept: unknown concept '" +
                                 unit.concept_id + "'");
    }
    if (auto violations = validate(c); !violations.empty())
        throw SchemaError(violations.front().path, violations.front().message);
    return c;
}

Curriculum load_curriculum(std::istream& source) {
    std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    return load_curriculum(std::string_view(text));
}

namespace {

std::string read_curriculum_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(path, "cannot open curriculum file");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Curriculum load_curriculum_file(const std::string& path) { return load_curriculum(read_curriculum_file(path)); }

Curriculum parse_curriculum_file(const std::string& path) { return parse_curriculum(read_curriculum_file(path)); }

std::string_view bundled_curriculum_text() {
    return detail::embedded_assets().at("ngss_elementary");
}

Curriculum bundled_curriculum() { return load_curriculum(bundled_curriculum_text()); }

std::string serialize(const Curriculum& c) {
    json doc;
    doc["version"] = c.version();
    doc["subjects"] = json::array();
    for (const auto& s : c.subjects()) doc["subjects"].push_back({{"code", s.code}, {"name", s.name}});
    doc["concepts"] = json::array();
    for (const auto& k : c.concepts())
        doc["concepts"].push_back({{"id", k.id}, {"desc", k.desc}, {"subject", k.subject}});
    doc["units"] = json::array();
    for (const auto& u : c.units()) {
        doc["units"].push_back({{"id", u.id},
                                {"core_idea", u.core_idea},
                                {"outcome", u.outcome},
                                {"grade", u.grade},
                                {"concept", u.concept_id}});
    }
    return doc.dump(2) + "\n";
}

std::vector<LearningUnit> units_for_grade(const Curriculum& c, int g) {
    check_grade(g);
    std::vector<LearningUnit> out;
    for (const auto& u : c.units())
        if (u.grade == g) out.push_back(u);
    return out;
}

std::set<ConceptId> concepts_at_or_below(const Curriculum& c, int g) {
    check_grade(g);
    std::set<ConceptId> out;
    for (const auto& u : c.units())
        if (u.grade <= g) out.insert(u.concept_id);
    return out;
}

std::vector<Violation> validate(const Curriculum& c) {
    std::vector<Violation> out;

    std::set<std::string> seen;
    for (const auto& s : c.subjects()) {
        if (!seen.insert(s.code).second)
            out.push_back({"/subjects/" + s.code, "duplicate subject code"});
        if (!known_subject_code(s.code))
            out.push_back({"/subjects/" + s.code, "unknown subject code"});
    }

    seen.clear();
    for (const auto& k : c.concepts()) {
        if (!seen.insert(k.id).second) out.push_back({"/concepts/" + k.id, "duplicate concept id"});
        if (!c.find_subject(k.subject))
            out.push_back({"/concepts/" + k.id + "/subject", "unknown subject '" + k.subject + "'"});
    }

    seen.clear();
    std::set<ConceptId> concepts_with_units;
    std::set<int> grades_with_units;
    for (const auto& u : c.units()) {
        if (!seen.insert(u.id).second) out.push_back({"/units/" + u.id, "duplicate unit id"});
        if (u.grade < kMinGrade || u.grade > kMaxGrade)
            out.push_back({"/units/" + u.id + "/grade", "grade outside 1..5"});
        else
            grades_with_units.insert(u.grade);
        if (!c.find_concept(u.concept_id))
            out.push_back({"/units/" + u.id + "/concept", "unknown concept '" + u.concept_id + "'"});
        else
            concepts_with_units.insert(u.concept_id);
    }

    std::set<ConceptId> reported;
    for (const auto& k : c.concepts()) {
        if (!concepts_with_units.count(k.id) && reported.insert(k.id).second)
            out.push_back({"/concepts/" + k.id, "concept has no learning units"});
    }
    for (int g = kMinGrade; g <= kMaxGrade; ++g) {
        if (!grades_with_units.count(g))
            out.push_back({"/units", "grade " + std::to_string(g) + " has no learning units"});
    }
    return out;
}

}  // namespace simlearner
