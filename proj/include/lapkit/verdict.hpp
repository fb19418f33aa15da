#pragma once

#include <string>

#include <json.hpp>

namespace lapkit {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

/// Fail dominates, then inconclusive.
Verdict combine(Verdict a, Verdict b);

/// JSON has no non-finite numbers: they travel as "inf", "-inf" and "nan".
nlohmann::json encode_double(double v);
double decode_double(const nlohmann::json& j);

}  // namespace lapkit
