#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace fxrange {

// Intermediate variables of one OS-ELM training step, in datapath order.
enum class TrainVar : std::size_t {
    e,
    h,
    gamma1,
    gamma2,
    gamma3,
    gamma4,
    gamma5,
    gamma6,
    P,
    gamma7,
    gamma8,
    gamma9,
    gamma10,
    beta,
};
inline constexpr std::size_t kTrainVarCount = 14;

enum class PredVar : std::size_t { e, h, y };
inline constexpr std::size_t kPredVarCount = 3;

// Quantities that enter the datapath from outside.
enum class InputVar : std::size_t { x, t, alpha, b };
inline constexpr std::size_t kInputVarCount = 4;

inline constexpr std::array<std::string_view, kTrainVarCount> kTrainVarNames = {
    "e", "h", "gamma1", "gamma2", "gamma3", "gamma4", "gamma5",
    "gamma6", "P", "gamma7", "gamma8", "gamma9", "gamma10", "beta",
};
inline constexpr std::array<std::string_view, kPredVarCount> kPredVarNames = {"pred.e", "pred.h", "pred.y"};
inline constexpr std::array<std::string_view, kInputVarCount> kInputVarNames = {"x", "t", "alpha", "b"};

inline constexpr std::string_view name_of(TrainVar v) { return kTrainVarNames[static_cast<std::size_t>(v)]; }
inline constexpr std::string_view name_of(PredVar v) { return kPredVarNames[static_cast<std::size_t>(v)]; }
inline constexpr std::string_view name_of(InputVar v) { return kInputVarNames[static_cast<std::size_t>(v)]; }

// Variables produced by a matrix product and therefore backed by an accumulator.
inline constexpr bool is_product(TrainVar v)
{
    switch (v) {
    case TrainVar::e:
    case TrainVar::gamma1:
    case TrainVar::gamma2:
    case TrainVar::gamma3:
    case TrainVar::gamma4:
    case TrainVar::gamma7:
    case TrainVar::gamma8:
    case TrainVar::gamma10:
        return true;
    default:
        return false;
    }
}

inline constexpr bool is_product(PredVar v) { return v != PredVar::h; }

/// Every variable name a complete report carries.
inline constexpr std::size_t kReportVarCount = kInputVarCount + kTrainVarCount + kPredVarCount;

inline constexpr std::array<std::string_view, kReportVarCount> report_variable_names()
{
    std::array<std::string_view, kReportVarCount> out{};
    std::size_t i = 0;
    for (auto n : kInputVarNames) {
        out[i++] = n;
    }
    for (auto n : kTrainVarNames) {
        out[i++] = n;
    }
    for (auto n : kPredVarNames) {
        out[i++] = n;
    }
    return out;
}

inline std::optional<TrainVar> train_var_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < kTrainVarCount; ++i) {
        if (kTrainVarNames[i] == name) {
            return static_cast<TrainVar>(i);
        }
    }
    return std::nullopt;
}

}  // namespace fxrange
