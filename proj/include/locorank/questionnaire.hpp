#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locorank/session.hpp"

namespace locorank {

inline constexpr std::size_t kQuickDashItems = 11;
inline constexpr std::size_t kTriqItems = 19;
inline constexpr std::size_t kTlxItems = 5;

// Dataset column names for the questionnaire blocks.
const std::array<std::string, kQuickDashItems>& quickdash_item_names();
const std::array<std::string, kTriqItems>& triq_item_names();
const std::array<std::string, kTlxItems>& tlx_item_names();

struct QuickDash {
    // Items are 1..5; nullopt marks a skipped item.
    std::array<std::optional<int>, kQuickDashItems> items{};
};

// ((sum of answered / answered count) - 1) * 25, defined for at most one
// missing item. Throws TooManyMissing otherwise.
double quickdash_score(const QuickDash& q);

struct PostTask {
    double presence = 0.0;    // 1..7
    double discomfort = 0.0;  // 1..10
    std::array<double, kTlxItems> tlx{};  // 0..100 each
};

struct QuestionnaireResponse {
    std::string participant_id;
    QuickDash quickdash;
    std::array<bool, kTriqItems> triq{};
    std::map<TechniqueId, PostTask> post_task;
};

struct QuestionnaireSet {
    std::vector<QuestionnaireResponse> responses;

    const QuestionnaireResponse* find(const std::string& participant_id) const;
};

// One JSON object per line; see the README for the record layout.
QuestionnaireSet parse_questionnaires(const std::string& path);
QuestionnaireSet parse_questionnaires_text(const std::string& text);
std::string serialize_questionnaires(const QuestionnaireSet& set);
void write_questionnaires(const QuestionnaireSet& set, const std::string& path);

}  // namespace locorank
