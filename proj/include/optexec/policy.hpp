#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace optexec {

/// Action codes used in every exported file.
enum class ActionKind : std::uint8_t {
    Wait = 0,
    QuoteLimit = 1,
    MarketSell = 2,
    TerminalBlock = 3,  // only appears in path records
};

std::string_view to_string(ActionKind kind);

/// A policy decision; `units` is the volume in multiples of delta_x
/// (quoted volume for QuoteLimit, sold volume for MarketSell, 0 for Wait).
struct Action {
    ActionKind kind = ActionKind::Wait;
    int units = 0;

    static constexpr Action wait() { return {ActionKind::Wait, 0}; }
    static constexpr Action quote(int units) {
        return units == 0 ? wait() : Action{ActionKind::QuoteLimit, units};
    }
    static constexpr Action sell(int units) { return {ActionKind::MarketSell, units}; }

    /// Packed as kind in bits 14-15 and volume in bits 0-13.
    std::uint16_t encode() const noexcept {
        return static_cast<std::uint16_t>((static_cast<unsigned>(kind) << 14) | (static_cast<unsigned>(units) & 0x3FFFu));
    }
    static Action decode(std::uint16_t packed) noexcept {
        return {static_cast<ActionKind>(packed >> 14), static_cast<int>(packed & 0x3FFFu)};
    }

    bool operator==(const Action&) const = default;
};

/// Optimal action per (k, i_x, i_xi). Only every `stride`-th time step is
/// stored; lookups at other steps read the nearest earlier stored step.
class PolicyGrid {
public:
    PolicyGrid() = default;
    PolicyGrid(int n_t, int n_x, int n_xi, int stride = 1);

    int n_t() const noexcept { return n_t_; }
    int n_x() const noexcept { return n_x_; }
    int n_xi() const noexcept { return n_xi_; }
    int stride() const noexcept { return stride_; }
    int stored_steps() const noexcept { return stored_steps_; }

    bool stores(int k) const noexcept { return k % stride_ == 0; }

    Action at(int k, int i_x, int i_xi) const noexcept {
        return Action::decode(codes_[offset(k, i_x, i_xi)]);
    }
    void set(int k, int i_x, int i_xi, Action action) noexcept {
        codes_[offset(k, i_x, i_xi)] = action.encode();
    }

    /// Writes a whole slice (cells in i_x-major order) for a stored step k.
    void set_slice(int k, std::span<const std::uint16_t> slice);

    std::span<const std::uint16_t> raw() const noexcept { return codes_; }
    std::span<std::uint16_t> raw() noexcept { return codes_; }

    bool operator==(const PolicyGrid&) const = default;

private:
    std::size_t offset(int k, int i_x, int i_xi) const noexcept {
        const auto slot = static_cast<std::size_t>(k / stride_);
        return (slot * static_cast<std::size_t>(n_x_ + 1) + static_cast<std::size_t>(i_x)) *
                   static_cast<std::size_t>(n_xi_ + 1) +
               static_cast<std::size_t>(i_xi);
    }

    int n_t_ = 0;
    int n_x_ = 0;
    int n_xi_ = 0;
    int stride_ = 1;
    int stored_steps_ = 0;
    std::vector<std::uint16_t> codes_;
};

}  // namespace optexec
