#pragma once

// Dormand-Prince 8(5,3) explicit Runge-Kutta stepper with seventh-order
// dense output. Coefficients follow Hairer, Norsett and Wanner's DOP853.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace lanemden {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct DenseSegment {
    double r0 = 0.0;
    double h = 0.0;
    std::array<Vec<N>, 8> rc{};

    Vec<N> operator()(double r) const {
        const double s = (r - r0) / h, s1 = 1.0 - s;
        Vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = rc[0][i] + s * (rc[1][i] + s1 * (rc[2][i] + s * (rc[3][i] +
                   s1 * (rc[4][i] + s * (rc[5][i] + s1 * (rc[6][i] + s * rc[7][i]))))));
        return y;
    }

    double at(double r, std::size_t i) const {
        const double s = (r - r0) / h, s1 = 1.0 - s;
        return rc[0][i] + s * (rc[1][i] + s1 * (rc[2][i] + s * (rc[3][i] +
               s1 * (rc[4][i] + s * (rc[5][i] + s1 * (rc[6][i] + s * rc[7][i]))))));
    }

    double r1() const { return r0 + h; }
};

struct StepControl {
    double safe = 0.9;
    double fac_min = 1.0 / 3.0;
    double fac_max = 6.0;
    double beta = 0.0;
};

// Work arrays and result of one trial step from (r, y) with slope f.
template <std::size_t N>
struct Dop853Trial {
    double r = 0.0, h = 0.0;
    Vec<N> y{}, f{};
    Vec<N> k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, k8{}, k9{}, k10{};
    Vec<N> y_new{}, f_new{};
    double err = 0.0;
};

template <std::size_t N>
class Dop853 {
public:
    using State = Vec<N>;
    using Trial = Dop853Trial<N>;

    Dop853(double rel_tol, double abs_tol) : rtol_(rel_tol), atol_(abs_tol) {}

    double rel_tol() const { return rtol_; }
    double abs_tol() const { return atol_; }

    // Eleven stage evaluations; fills y_new (eighth order) and the scaled
    // error norm. f_new is not evaluated here.
    template <class Rhs>
    void attempt(const Rhs& rhs, double r, const State& y, const State& f, double h, Trial& t) const {
        constexpr double c2 = 0.526001519587677318785587544488E-01,
            c3 = 0.789002279381515978178381316732E-01,
            c4 = 0.118350341907227396726757197510E+00,
            c5 = 0.281649658092772603273242802490E+00,
            c6 = 0.333333333333333333333333333333E+00,
            c7 = 0.25E+00,
            c8 = 0.307692307692307692307692307692E+00,
            c9 = 0.651282051282051282051282051282E+00,
            c10 = 0.6E+00,
            c11 = 0.857142857142857142857142857142E+00;
        constexpr double b1 = 5.42937341165687622380535766363E-2,
            b6 = 4.45031289275240888144113950566E0,
            b7 = 1.89151789931450038304281599044E0,
            b8 = -5.8012039600105847814672114227E0,
            b9 = 3.1116436695781989440891606237E-1,
            b10 = -1.52160949662516078556178806805E-1,
            b11 = 2.01365400804030348374776537501E-1,
            b12 = 4.47106157277725905176885569043E-2;
        constexpr double a21 = 5.26001519587677318785587544488E-2,
            a31 = 1.97250569845378994544595329183E-2,
            a32 = 5.91751709536136983633785987549E-2,
            a41 = 2.95875854768068491816892993775E-2,
            a43 = 8.87627564304205475450678981324E-2,
            a51 = 2.41365134159266685502369798665E-1,
            a53 = -8.84549479328286085344864962717E-1,
            a54 = 9.24834003261792003115737966543E-1,
            a61 = 3.7037037037037037037037037037E-2,
            a64 = 1.70828608729473871279604482173E-1,
            a65 = 1.25467687566822425016691814123E-1,
            a71 = 3.7109375E-2,
            a74 = 1.70252211019544039314978060272E-1,
            a75 = 6.02165389804559606850219397283E-2,
            a76 = -1.7578125E-2,
            a81 = 3.70920001185047927108779319836E-2,
            a84 = 1.70383925712239993810214054705E-1,
            a85 = 1.07262030446373284651809199168E-1,
            a86 = -1.53194377486244017527936158236E-2,
            a87 = 8.27378916381402288758473766002E-3,
            a91 = 6.24110958716075717114429577812E-1,
            a94 = -3.36089262944694129406857109825E0,
            a95 = -8.68219346841726006818189891453E-1,
            a96 = 2.75920996994467083049415600797E1,
            a97 = 2.01540675504778934086186788979E1,
            a98 = -4.34898841810699588477366255144E1,
            a101 = 4.77662536438264365890433908527E-1,
            a104 = -2.48811461997166764192642586468E0,
            a105 = -5.90290826836842996371446475743E-1,
            a106 = 2.12300514481811942347288949897E1,
            a107 = 1.52792336328824235832596922938E1,
            a108 = -3.32882109689848629194453265587E1,
            a109 = -2.03312017085086261358222928593E-2,
            a111 = -9.3714243008598732571704021658E-1,
            a114 = 5.18637242884406370830023853209E0,
            a115 = 1.09143734899672957818500254654E0,
            a116 = -8.14978701074692612513997267357E0,
            a117 = -1.85200656599969598641566180701E1,
            a118 = 2.27394870993505042818970056734E1,
            a119 = 2.49360555267965238987089396762E0,
            a1110 = -3.0467644718982195003823669022E0,
            a121 = 2.27331014751653820792359768449E0,
            a124 = -1.05344954667372501984066689879E1,
            a125 = -2.00087205822486249909675718444E0,
            a126 = -1.79589318631187989172765950534E1,
            a127 = 2.79488845294199600508499808837E1,
            a128 = -2.85899827713502369474065508674E0,
            a129 = -8.87285693353062954433549289258E0,
            a1210 = 1.23605671757943030647266201528E1,
            a1211 = 6.43392746015763530355970484046E-1;
        constexpr double bhh1 = 0.244094488188976377952755905512E+00,
            bhh2 = 0.733846688281611857341361741547E+00,
            bhh3 = 0.220588235294117647058823529412E-01,
            er1 = 0.1312004499419488073250102996E-01,
            er6 = -0.1225156446376204440720569753E+01,
            er7 = -0.4957589496572501915214079952E+00,
            er8 = 0.1664377182454986536961530415E+01,
            er9 = -0.3503288487499736816886487290E+00,
            er10 = 0.3341791187130174790297318841E+00,
            er11 = 0.8192320648511571246570742613E-01,
            er12 = -0.2235530786388629525884427845E-01;

        t.r = r;
        t.h = h;
        t.y = y;
        t.f = f;
        const State& k1 = f;
        State w;
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * a21 * k1[i];
        t.k2 = rhs(r + c2 * h, w);
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a31 * k1[i] + a32 * t.k2[i]);
        t.k3 = rhs(r + c3 * h, w);
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a41 * k1[i] + a43 * t.k3[i]);
        t.k4 = rhs(r + c4 * h, w);
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a51 * k1[i] + a53 * t.k3[i] + a54 * t.k4[i]);
        t.k5 = rhs(r + c5 * h, w);
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a61 * k1[i] + a64 * t.k4[i] + a65 * t.k5[i]);
        t.k6 = rhs(r + c6 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a71 * k1[i] + a74 * t.k4[i] + a75 * t.k5[i] + a76 * t.k6[i]);
        t.k7 = rhs(r + c7 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a81 * k1[i] + a84 * t.k4[i] + a85 * t.k5[i] + a86 * t.k6[i] + a87 * t.k7[i]);
        t.k8 = rhs(r + c8 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a91 * k1[i] + a94 * t.k4[i] + a95 * t.k5[i] + a96 * t.k6[i] + a97 * t.k7[i] +
                               a98 * t.k8[i]);
        t.k9 = rhs(r + c9 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a101 * k1[i] + a104 * t.k4[i] + a105 * t.k5[i] + a106 * t.k6[i] + a107 * t.k7[i] +
                               a108 * t.k8[i] + a109 * t.k9[i]);
        t.k10 = rhs(r + c10 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a111 * k1[i] + a114 * t.k4[i] + a115 * t.k5[i] + a116 * t.k6[i] + a117 * t.k7[i] +
                               a118 * t.k8[i] + a119 * t.k9[i] + a1110 * t.k10[i]);
        // stage 11 reuses k2, stage 12 reuses k3
        t.k2 = rhs(r + c11 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a121 * k1[i] + a124 * t.k4[i] + a125 * t.k5[i] + a126 * t.k6[i] + a127 * t.k7[i] +
                               a128 * t.k8[i] + a129 * t.k9[i] + a1210 * t.k10[i] + a1211 * t.k2[i]);
        t.k3 = rhs(r + h, w);
        for (std::size_t i = 0; i < N; ++i) {
            t.k4[i] = b1 * k1[i] + b6 * t.k6[i] + b7 * t.k7[i] + b8 * t.k8[i] + b9 * t.k9[i] + b10 * t.k10[i] +
                      b11 * t.k2[i] + b12 * t.k3[i];
            t.y_new[i] = y[i] + h * t.k4[i];
        }

        double err = 0.0, err2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = 1.0 / (atol_ + rtol_ * std::max(std::fabs(y[i]), std::fabs(t.y_new[i])));
            double sq = (t.k4[i] - bhh1 * k1[i] - bhh2 * t.k9[i] - bhh3 * t.k3[i]) * sk;
            err2 += sq * sq;
            sq = (er1 * k1[i] + er6 * t.k6[i] + er7 * t.k7[i] + er8 * t.k8[i] + er9 * t.k9[i] + er10 * t.k10[i] +
                  er11 * t.k2[i] + er12 * t.k3[i]) * sk;
            err += sq * sq;
        }
        const double deno = err + 0.01 * err2;
        t.err = std::fabs(h) * err * std::sqrt(1.0 / (deno <= 0.0 ? double(N) : deno * double(N)));
    }

    // Builds the interpolant on an accepted trial. Requires t.f_new set.
    template <class Rhs>
    DenseSegment<N> dense(const Rhs& rhs, const Trial& t) const {
        constexpr double c14 = 0.1E+00, c15 = 0.2E+00, c16 = 0.777777777777777777777777777778E+00;
        constexpr double a141 = 5.61675022830479523392909219681E-2,
            a147 = 2.53500210216624811088794765333E-1,
            a148 = -2.46239037470802489917441475441E-1,
            a149 = -1.24191423263816360469010140626E-1,
            a1410 = 1.5329179827876569731206322685E-1,
            a1411 = 8.20105229563468988491666602057E-3,
            a1412 = 7.56789766054569976138603589584E-3,
            a1413 = -8.298E-3,
            a151 = 3.18346481635021405060768473261E-2,
            a156 = 2.83009096723667755288322961402E-2,
            a157 = 5.35419883074385676223797384372E-2,
            a158 = -5.49237485713909884646569340306E-2,
            a1511 = -1.08347328697249322858509316994E-4,
            a1512 = 3.82571090835658412954920192323E-4,
            a1513 = -3.40465008687404560802977114492E-4,
            a1514 = 1.41312443674632500278074618366E-1,
            a161 = -4.28896301583791923408573538692E-1,
            a166 = -4.69762141536116384314449447206E0,
            a167 = 7.68342119606259904184240953878E0,
            a168 = 4.06898981839711007970213554331E0,
            a169 = 3.56727187455281109270669543021E-1,
            a1613 = -1.39902416515901462129418009734E-3,
            a1614 = 2.9475147891527723389556272149E0,
            a1615 = -9.15095847217987001081870187138E0;
        constexpr double d41 = -0.84289382761090128651353491142E+01,
            d46 = 0.56671495351937776962531783590E+00,
            d47 = -0.30689499459498916912797304727E+01,
            d48 = 0.23846676565120698287728149680E+01,
            d49 = 0.21170345824450282767155149946E+01,
            d410 = -0.87139158377797299206789907490E+00,
            d411 = 0.22404374302607882758541771650E+01,
            d412 = 0.63157877876946881815570249290E+00,
            d413 = -0.88990336451333310820698117400E-01,
            d414 = 0.18148505520854727256656404962E+02,
            d415 = -0.91946323924783554000451984436E+01,
            d416 = -0.44360363875948939664310572000E+01,
            d51 = 0.10427508642579134603413151009E+02,
            d56 = 0.24228349177525818288430175319E+03,
            d57 = 0.16520045171727028198505394887E+03,
            d58 = -0.37454675472269020279518312152E+03,
            d59 = -0.22113666853125306036270938578E+02,
            d510 = 0.77334326684722638389603898808E+01,
            d511 = -0.30674084731089398182061213626E+02,
            d512 = -0.93321305264302278729567221706E+01,
            d513 = 0.15697238121770843886131091075E+02,
            d514 = -0.31139403219565177677282850411E+02,
            d515 = -0.93529243588444783865713862664E+01,
            d516 = 0.35816841486394083752465898540E+02,
            d61 = 0.19985053242002433820987653617E+02,
            d66 = -0.38703730874935176555105901742E+03,
            d67 = -0.18917813819516756882830838328E+03,
            d68 = 0.52780815920542364900561016686E+03,
            d69 = -0.11573902539959630126141871134E+02,
            d610 = 0.68812326946963000169666922661E+01,
            d611 = -0.10006050966910838403183860980E+01,
            d612 = 0.77771377980534432092869265740E+00,
            d613 = -0.27782057523535084065932004339E+01,
            d614 = -0.60196695231264120758267380846E+02,
            d615 = 0.84320405506677161018159903784E+02,
            d616 = 0.11992291136182789328035130030E+02,
            d71 = -0.25693933462703749003312586129E+02,
            d76 = -0.15418974869023643374053993627E+03,
            d77 = -0.23152937917604549567536039109E+03,
            d78 = 0.35763911791061412378285349910E+03,
            d79 = 0.93405324183624310003907691704E+02,
            d710 = -0.37458323136451633156875139351E+02,
            d711 = 0.10409964950896230045147246184E+03,
            d712 = 0.29840293426660503123344363579E+02,
            d713 = -0.43533456590011143754432175058E+02,
            d714 = 0.96324553959188282948394950600E+02,
            d715 = -0.39177261675615439165231486172E+02,
            d716 = -0.14972683625798562581422125276E+03;

        const double h = t.h;
        const State& y = t.y;
        const State& k1 = t.f;
        const State& k4 = t.f_new;
        DenseSegment<N> d;
        d.r0 = t.r;
        d.h = h;
        auto& rc = d.rc;
        for (std::size_t i = 0; i < N; ++i) {
            rc[0][i] = y[i];
            const double ydiff = t.y_new[i] - y[i];
            rc[1][i] = ydiff;
            const double bspl = h * k1[i] - ydiff;
            rc[2][i] = bspl;
            rc[3][i] = ydiff - h * k4[i] - bspl;
            rc[4][i] = d41 * k1[i] + d46 * t.k6[i] + d47 * t.k7[i] + d48 * t.k8[i] + d49 * t.k9[i] +
                       d410 * t.k10[i] + d411 * t.k2[i] + d412 * t.k3[i];
            rc[5][i] = d51 * k1[i] + d56 * t.k6[i] + d57 * t.k7[i] + d58 * t.k8[i] + d59 * t.k9[i] +
                       d510 * t.k10[i] + d511 * t.k2[i] + d512 * t.k3[i];
            rc[6][i] = d61 * k1[i] + d66 * t.k6[i] + d67 * t.k7[i] + d68 * t.k8[i] + d69 * t.k9[i] +
                       d610 * t.k10[i] + d611 * t.k2[i] + d612 * t.k3[i];
            rc[7][i] = d71 * k1[i] + d76 * t.k6[i] + d77 * t.k7[i] + d78 * t.k8[i] + d79 * t.k9[i] +
                       d710 * t.k10[i] + d711 * t.k2[i] + d712 * t.k3[i];
        }
        State w;
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a141 * k1[i] + a147 * t.k7[i] + a148 * t.k8[i] + a149 * t.k9[i] +
                               a1410 * t.k10[i] + a1411 * t.k2[i] + a1412 * t.k3[i] + a1413 * k4[i]);
        const State k14 = rhs(t.r + c14 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a151 * k1[i] + a156 * t.k6[i] + a157 * t.k7[i] + a158 * t.k8[i] +
                               a1511 * t.k2[i] + a1512 * t.k3[i] + a1513 * k4[i] + a1514 * k14[i]);
        const State k15 = rhs(t.r + c15 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a161 * k1[i] + a166 * t.k6[i] + a167 * t.k7[i] + a168 * t.k8[i] +
                               a169 * t.k9[i] + a1613 * k4[i] + a1614 * k14[i] + a1615 * k15[i]);
        const State k16 = rhs(t.r + c16 * h, w);
        for (std::size_t i = 0; i < N; ++i) {
            rc[4][i] = h * (rc[4][i] + d413 * k4[i] + d414 * k14[i] + d415 * k15[i] + d416 * k16[i]);
            rc[5][i] = h * (rc[5][i] + d513 * k4[i] + d514 * k14[i] + d515 * k15[i] + d516 * k16[i]);
            rc[6][i] = h * (rc[6][i] + d613 * k4[i] + d614 * k14[i] + d615 * k15[i] + d616 * k16[i]);
            rc[7][i] = h * (rc[7][i] + d713 * k4[i] + d714 * k14[i] + d715 * k15[i] + d716 * k16[i]);
        }
        return d;
    }

    template <class Rhs>
    double initial_step(const Rhs& rhs, double r, const State& y, const State& f, double hmax) const {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = atol_ + rtol_ * std::fabs(y[i]);
            dnf += (f[i] / sk) * (f[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = std::min((dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01, hmax);
        State w;
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * f[i];
        const State f2 = rhs(r + h, w);
        double der2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sq = (f2[i] - f[i]) / (atol_ + rtol_ * std::fabs(y[i]));
            der2 += sq * sq;
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.125);
        return std::min(100.0 * h, std::min(h1, hmax));
    }

    // Step size factor after a trial with scaled error err.
    static double next_factor(double err, bool accepted, const StepControl& c = {}) {
        const double fac11 = std::pow(std::max(err, 1e-300), 1.0 / 8.0);
        if (accepted) return 1.0 / std::max(1.0 / c.fac_max, std::min(1.0 / c.fac_min, fac11 / c.safe));
        return 1.0 / std::min(1.0 / c.fac_min, fac11 / c.safe);
    }

private:
    double rtol_;
    double atol_;
};

// Generic driver: integrates y' = rhs(r, y) from r0 to r1, calling
// on_step(segment) after each accepted step. Returns the final state.
template <std::size_t N, class Rhs, class OnStep>
Vec<N> dop853_integrate(const Rhs& rhs, double r0, Vec<N> y, double r1, double rel_tol, double abs_tol,
                        OnStep&& on_step, long max_steps = 1000000) {
    Dop853<N> st(rel_tol, abs_tol);
    Dop853Trial<N> t;
    Vec<N> f = rhs(r0, y);
    double r = r0;
    double h = st.initial_step(rhs, r, y, f, r1 - r0);
    long steps = 0;
    bool rejected = false;
    while (r < r1 && steps++ < max_steps) {
        bool last = false;
        if (r + 1.01 * h >= r1) {
            h = r1 - r;
            last = true;
        }
        st.attempt(rhs, r, y, f, h, t);
        if (t.err <= 1.0) {
            t.f_new = rhs(r + h, t.y_new);
            on_step(st.dense(rhs, t));
            double fac = Dop853<N>::next_factor(t.err, true);
            if (rejected) fac = std::min(fac, 1.0);
            rejected = false;
            r = last ? r1 : r + h;
            y = t.y_new;
            f = t.f_new;
            h *= fac;
        } else {
            h *= Dop853<N>::next_factor(t.err, false);
            rejected = true;
        }
    }
    return y;
}

}  // namespace lanemden
