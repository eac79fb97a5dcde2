#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "moodifier/analysis/survey.hpp"
#include "moodifier/common/post.hpp"
#include "moodifier/experiment/participant.hpp"
#include "moodifier/experiment/telemetry.hpp"
#include "moodifier/feed/overrides.hpp"

namespace moodifier::store {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Table { Posts, Participants, Overrides, Events, Surveys, Labels };

inline constexpr std::array<Table, 6> kAllTables{Table::Posts,   Table::Participants,
                                                 Table::Overrides, Table::Events,
                                                 Table::Surveys, Table::Labels};

std::string_view to_string(Table t);
std::optional<Table> parse_table(std::string_view name);

// One JSON object per record. Every record carries "schema_version"; the
// decoders throw Error(CorruptRecord) on a missing or ill-typed field or an
// unsupported version.
Json to_record(const Post& post);
Json to_record(const PostLabel& label);
Json to_record(const experiment::Participant& p);
Json to_record(const feed::OverrideRecord& o);
Json to_record(const experiment::TelemetryEvent& e);
Json to_record(const analysis::SurveyResponse& s);

Post post_from_record(const Json& j);
PostLabel label_from_record(const Json& j);
experiment::Participant participant_from_record(const Json& j);
feed::OverrideRecord override_from_record(const Json& j);
experiment::TelemetryEvent event_from_record(const Json& j);
analysis::SurveyResponse survey_from_record(const Json& j);

// Payload object of a telemetry event, without the envelope.
Json payload_to_json(const experiment::EventPayload& payload);
experiment::EventPayload payload_from_json(std::string_view kind, const Json& payload);

}  // namespace moodifier::store
