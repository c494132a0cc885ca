#include "optexec/policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace optexec {

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::Wait: return "wait";
        case ActionKind::QuoteLimit: return "quote_limit";
        case ActionKind::MarketSell: return "market_sell";
        case ActionKind::TerminalBlock: return "terminal_block";
    }
    return "unknown";
}

PolicyGrid::PolicyGrid(int n_t, int n_x, int n_xi, int stride)
    : n_t_(n_t), n_x_(n_x), n_xi_(n_xi), stride_(stride) {
    if (n_t < 1 || n_x < 0 || n_xi < 0 || stride < 1) {
        throw std::invalid_argument("PolicyGrid: invalid dimensions");
    }
    stored_steps_ = (n_t + stride - 1) / stride;
    codes_.assign(static_cast<std::size_t>(stored_steps_) * static_cast<std::size_t>(n_x + 1) *
                      static_cast<std::size_t>(n_xi + 1),
                  Action::wait().encode());
}

void PolicyGrid::set_slice(int k, std::span<const std::uint16_t> slice) {
    const auto cells = static_cast<std::size_t>(n_x_ + 1) * static_cast<std::size_t>(n_xi_ + 1);
    if (!stores(k) || slice.size() != cells) throw std::invalid_argument("PolicyGrid::set_slice: bad slice");
    std::copy(slice.begin(), slice.end(), codes_.begin() + static_cast<std::ptrdiff_t>(offset(k, 0, 0)));
}

}  // namespace optexec
