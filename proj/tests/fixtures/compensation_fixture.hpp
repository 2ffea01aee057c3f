#pragma once

// Regression anchors for the quantization-compensation bench at its default
// configuration (9 fractional periods, seed 7, 500 Adam steps, sigma 1.0,
// 3 taps, length 512).  Computed once by the bench itself and frozen; a
// re-run must reproduce each value to 1e-9.  These are fixtures of this
// implementation, not externally reported numbers.

namespace anchor::fixtures {

struct CompensationFixture {
    double period;
    double mae_linear;
    double mae_gaussian;
    double eta;
};

inline constexpr CompensationFixture kCompensationDefault[] = {
    {8.3000000000000007, 0.20079363327496033, 0.0041488760885938355, 48.397115022785513},
    {8.5, 0.27206215926621274, 0.0007150150143865223, 380.49852631366088},
    {8.6999999999999993, 0.20133211611478474, 0.004081915599469031, 49.322949289047941},
    {12.25, 0.16886668370160565, 0.004167775324195106, 40.517223354456547},
    {12.5, 0.28420548565024562, 0.0010122243077922569, 280.77322729990624},
    {12.75, 0.16585947015274458, 0.0043728272084650128, 37.929573304810731},
    {20.199999999999999, 0.13194217249987322, 0.0035929749535100731, 36.722263363115125},
    {20.5, 0.30071538981260432, 0.0012497768521873185, 240.61526606633984},
    {20.800000000000001, 0.13325301184232485, 0.0039215563049723326, 33.979624791659084},
};

}  // namespace anchor::fixtures
