#include <gtest/gtest.h>

#include <random>

#include "simlearner/context.hpp"
#include "simlearner/errors.hpp"
#include "support.hpp"

using namespace simlearner;

namespace {

std::vector<ConceptId> ids(const KnowledgePartition& p, bool learned) {
    std::vector<ConceptId> out;
    if (learned)
        for (const auto& c : p.learned) out.push_back(c.id);
    else
        for (const auto& c : p.unknown) out.push_back(c.id);
    return out;
}

StudentProfile student_at(int grade) {
    auto p = preset_profiles().front();
    p.constraints = constraints_for_grade(grade);
    return p;
}

}  // namespace

TEST(Context, RelevantConceptsFollowSubjectAndGrade) {
    auto c = testing_support::mini_curriculum();
    EXPECT_EQ(relevant_concepts(c, 1, {"LS1"}), (std::set<ConceptId>{"LS1"}));
    EXPECT_EQ(relevant_concepts(c, 2, {"LS1"}), (std::set<ConceptId>{"LS1", "LS2"}));
    EXPECT_EQ(relevant_concepts(c, 5, {"PS4"}), (std::set<ConceptId>{"PS3", "PS4"}));
    EXPECT_EQ(relevant_concepts(c, 1, {"LS2"}), (std::set<ConceptId>{"LS1", "LS2"}));
    EXPECT_THROW(relevant_concepts(c, 6, {}), DomainError);
}

TEST(Context, PartitionUsesThresholdInclusively) {
    auto c = testing_support::mini_curriculum();
    auto store = testing_support::store_with({{"LS1", 0.3}, {"LS2", 0.29999}});
    auto p = partition_knowledge(store, c, 2, {"LS1"}, 0.3);
    EXPECT_EQ(ids(p, true), (std::vector<ConceptId>{"LS1"}));
    EXPECT_EQ(ids(p, false), (std::vector<ConceptId>{"LS2"}));
    EXPECT_DOUBLE_EQ(p.learned[0].mastery, 0.3);
    EXPECT_EQ(p.unknown[0].desc, "Ecosystems: interactions, energy, and dynamics");
}

TEST(Context, AboveGradeConceptsStayUnknownWhateverTheirMastery) {
    auto c = testing_support::mini_curriculum();
    auto store = testing_support::store_with({{"LS2", 1.0}, {"PS3", 0.9}});
    auto p = partition_knowledge(store, c, 1, {"LS2", "PS3"}, 0.3);
    EXPECT_TRUE(p.learned.empty());
    EXPECT_EQ(ids(p, false), (std::vector<ConceptId>{"LS1", "LS2", "PS3", "PS4"}));
}

TEST(Context, PartitionRejectsBadArguments) {
    auto c = testing_support::mini_curriculum();
    MemoryStore store;
    EXPECT_THROW(partition_knowledge(store, c, 0, {}, 0.3), DomainError);
    EXPECT_THROW(partition_knowledge(store, c, 1, {}, 1.5), DomainError);
}

TEST(Context, AssembleIsReadOnlyAndRendersBlocks) {
    auto c = testing_support::mini_curriculum();
    auto store = testing_support::store_with({{"LS1", 0.6}, {"PS4", 0.1}});
    const auto before = snapshot(store);
    std::vector<ChatMessage> history = {{Role::user, "Hi! What helps a cactus survive?"}};
    auto bundle = assemble(student_at(1), store, c, {"LS1", "PS4"}, history);
    EXPECT_EQ(snapshot(store), before);
    EXPECT_EQ(bundle.history, history);
    auto prompt = render_student_prompt(bundle, TemplateSet::builtin());
    ASSERT_EQ(prompt.size(), 2u);
    EXPECT_EQ(prompt[0].role, Role::system);
    const auto learned = testing_support::learned_block(prompt[0].text);
    EXPECT_NE(learned.find("LS1 (mastery 0.60)"), std::string::npos);
    EXPECT_EQ(learned.find("PS4"), std::string::npos);
    EXPECT_NE(prompt[0].text.find("- PS4: Waves"), std::string::npos);
    EXPECT_NE(prompt[0].text.find("No learning pattern observed yet."), std::string::npos);
    EXPECT_NE(prompt[0].text.find(render_personality(student_at(1).personality)), std::string::npos);
}

TEST(Context, HistoryMustAlternate) {
    auto c = testing_support::mini_curriculum();
    MemoryStore store;
    std::vector<ChatMessage> bad = {{Role::user, "a"}, {Role::user, "b"}};
    EXPECT_THROW(assemble(student_at(1), store, c, {"LS1"}, bad), ValidationError);
    std::vector<ChatMessage> sys = {{Role::system, "a"}};
    EXPECT_THROW(assemble(student_at(1), store, c, {"LS1"}, sys), ValidationError);
}

TEST(Context, RecentEpisodesAreNewestFirstAndBounded) {
    auto c = testing_support::mini_curriculum();
    MemoryStore store;
    for (int i = 1; i <= 5; ++i) {
        EpisodeDraft d;
        d.t = "t";
        d.content = "c";
        d.summary = "episode " + std::to_string(i);
        store.record_episode(d);
    }
    auto bundle = assemble(student_at(1), store, c, {"LS1"}, {}, {2});
    EXPECT_EQ(bundle.recent_episode_texts, (std::vector<std::string>{"episode 5", "episode 4"}));
}

// For random masteries and grades, the learned block never names a concept
// whose first grade exceeds the student's grade.
TEST(Context, GatingHoldsForRandomStores) {
    auto c = testing_support::mini_curriculum();
    auto templates = TemplateSet::builtin();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> mu(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, double> m;
        for (const auto& k : c.concepts()) m[k.id] = mu(rng);
        auto store = testing_support::store_with(m);
        const int g = 1 + trial % 5;
        std::set<ConceptId> session;
        for (const auto& k : c.concepts())
            if (rng() % 2) session.insert(k.id);
        auto prompt = render_student_prompt(assemble(student_at(g), store, c, session, {}), templates);
        const auto learned = testing_support::learned_block(prompt[0].text);
        for (const auto& k : c.concepts()) {
            const bool listed = learned.find("- " + k.id + " ") != std::string::npos;
            const bool allowed = c.concept_grade(k.id) <= g && m[k.id] >= 0.3;
            if (listed) {
                EXPECT_TRUE(allowed) << k.id << " at grade " << g;
            }
        }
    }
}
