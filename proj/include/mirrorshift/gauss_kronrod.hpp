#pragma once

#include <array>
#include <cstddef>

namespace mirrorshift::gk {

/// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
/// Positive-half abscissae; even indices are Kronrod-only nodes, odd indices
/// are the embedded Gauss nodes. Values are the classical published constants.
inline constexpr std::array<long double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329L,
    0.949107912342758524526189684047851L,
    0.864864423359769072789712788640926L,
    0.741531185599394439863864773280788L,
    0.586087235467691130294144838258730L,
    0.405845151377397166906606412076961L,
    0.207784955007898467600689403773245L,
    0.0L,
};

inline constexpr std::array<long double, 8> kronrod_weights = {
    0.022935322010529224963732008058970L,
    0.063092092629978553290700663189204L,
    0.104790010322250183839876322541518L,
    0.140653259715525918745189590510238L,
    0.169004726639267902826583426598550L,
    0.190350578064785409913256402421014L,
    0.204432940075298892414161999234649L,
    0.209482141084727828012999174891714L,
};

/// Weights of the embedded 7-point Gauss rule, matching kronrod_nodes[1,3,5,7].
inline constexpr std::array<long double, 4> gauss_weights = {
    0.129484966168869693270611432679082L,
    0.279705391489276667901467771423780L,
    0.381830050505118944950369775488975L,
    0.417959183673469387755102040816327L,
};

/// Expanded full 15-node table on [-1,1], ordered left to right.
struct Rule15 {
    std::array<double, 15> x{};
    std::array<double, 15> wk{};
    std::array<double, 15> wg{}; // zero at Kronrod-only nodes
};

inline constexpr Rule15 make_rule15() {
    Rule15 r;
    for (std::size_t i = 0; i < 7; ++i) {
        r.x[i] = static_cast<double>(-kronrod_nodes[i]);
        r.x[14 - i] = static_cast<double>(kronrod_nodes[i]);
        r.wk[i] = r.wk[14 - i] = static_cast<double>(kronrod_weights[i]);
    }
    r.x[7] = 0.0;
    r.wk[7] = static_cast<double>(kronrod_weights[7]);
    for (std::size_t j = 0; j < 3; ++j) {
        r.wg[2 * j + 1] = r.wg[13 - 2 * j] = static_cast<double>(gauss_weights[j]);
    }
    r.wg[7] = static_cast<double>(gauss_weights[3]);
    return r;
}

inline constexpr Rule15 rule15 = make_rule15();

} // namespace mirrorshift::gk
