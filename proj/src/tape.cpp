#include "multinex/tape.hpp"

#include <cmath>

#include "multinex/kernels.hpp"

namespace multinex::tape {
namespace {

constexpr double kLnEps = 1e-5;

// Sums g down to the given shape along axes where the target dim is 1
// (the reverse of broadcasting).
Tensor64 reduce_to(const Tensor64& g, int h, int w, int c) {
    if (g.height() == h && g.width() == w && g.channels() == c) return g;
    Tensor64 out(h, w, c);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            for (int k = 0; k < g.channels(); ++k)
                out.at(h == 1 ? 0 : y, w == 1 ? 0 : x, c == 1 ? 0 : k) += g.at(y, x, k);
    return out;
}

Tensor64 conv1x1_fwd(const Tensor64& x, const Tensor64& w, const Tensor64* b) {
    const int cin = w.width(), cout = w.height();
    Tensor64 out(x.height(), x.width(), cout);
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx) {
            const double* px = &x.at(y, xx, 0);
            double* po = &out.at(y, xx, 0);
            for (int o = 0; o < cout; ++o) {
                double acc = b ? (*b)[o] : 0.0;
                const double* wr = &w.at(o, 0, 0);
                for (int i = 0; i < cin; ++i) acc += wr[i] * px[i];
                po[o] = acc;
            }
        }
    return out;
}

Tensor64 dwconv_fwd(const Tensor64& x, const Tensor64& w) {
    const int k = w.height(), p = k / 2;
    Tensor64 out(x.height(), x.width(), x.channels());
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx)
            for (int c = 0; c < x.channels(); ++c) {
                double acc = 0.0;
                for (int dy = 0; dy < k; ++dy) {
                    const int sy = y + dy - p;
                    if (sy < 0 || sy >= x.height()) continue;
                    for (int dx = 0; dx < k; ++dx) {
                        const int sx = xx + dx - p;
                        if (sx < 0 || sx >= x.width()) continue;
                        acc += w.at(dy, dx, c) * x.at(sy, sx, c);
                    }
                }
                out.at(y, xx, c) = acc;
            }
    return out;
}

Tensor64 layer_norm_fwd(const Tensor64& x, const Tensor64& scale, const Tensor64& shift) {
    const int C = x.channels();
    Tensor64 out(x.height(), x.width(), C);
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx) {
            const double* px = &x.at(y, xx, 0);
            double mu = 0.0;
            for (int c = 0; c < C; ++c) mu += px[c];
            mu /= C;
            double var = 0.0;
            for (int c = 0; c < C; ++c) var += (px[c] - mu) * (px[c] - mu);
            var /= C;
            const double inv = 1.0 / std::sqrt(var + kLnEps);
            double* po = &out.at(y, xx, 0);
            for (int c = 0; c < C; ++c)
                po[c] = scale[c] * ((px[c] - mu) * inv) + shift[c];
        }
    return out;
}

} // namespace

Tape::Id Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

const Tape::Node& Tape::node(Id id) const {
    if (id < 0 || id >= static_cast<Id>(nodes_.size()))
        throw std::invalid_argument("tape: bad node id " + std::to_string(id));
    return nodes_[id];
}

const Tensor64& Tape::value(Id id) const { return node(id).val; }

double Tape::scalar(Id id) const {
    const Tensor64& v = value(id);
    if (v.size() != 1)
        throw std::invalid_argument("tape: node is not scalar, shape " + v.shape_str());
    return v[0];
}

Tape::Id Tape::input(Tensor64 value) {
    Node n;
    n.op = Op::Input;
    n.val = std::move(value);
    return push(std::move(n));
}

Tape::Id Tape::param(const std::string& name, Tensor64 value) {
    Node n;
    n.op = Op::Param;
    n.val = std::move(value);
    n.name = name;
    return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.val = multinex::add(value(a), value(b));
    return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
    Node n;
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.val = multinex::sub(value(a), value(b));
    return push(std::move(n));
}

Tape::Id Tape::mul(Id a, Id b) {
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.val = multinex::mul(value(a), value(b));
    return push(std::move(n));
}

Tape::Id Tape::div(Id a, Id b) {
    Node n;
    n.op = Op::Div;
    n.a = a;
    n.b = b;
    n.val = multinex::div(value(a), value(b));
    return push(std::move(n));
}

Tape::Id Tape::scale(Id a, double s) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.k = s;
    n.val = multinex::scale(value(a), s);
    return push(std::move(n));
}

Tape::Id Tape::offset(Id a, double s) {
    Node n;
    n.op = Op::Offset;
    n.a = a;
    n.k = s;
    n.val = map(value(a), [s](double v) { return v + s; });
    return push(std::move(n));
}

Tape::Id Tape::relu(Id a) {
    Node n;
    n.op = Op::Relu;
    n.a = a;
    n.val = map(value(a), [](double v) { return v > 0.0 ? v : 0.0; });
    return push(std::move(n));
}

Tape::Id Tape::sigmoid(Id a) {
    Node n;
    n.op = Op::Sigmoid;
    n.a = a;
    n.val = map(value(a), [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    return push(std::move(n));
}

Tape::Id Tape::tanh(Id a) {
    Node n;
    n.op = Op::Tanh;
    n.a = a;
    n.val = map(value(a), [](double v) { return std::tanh(v); });
    return push(std::move(n));
}

Tape::Id Tape::pow(Id a, double e) {
    Node n;
    n.op = Op::Pow;
    n.a = a;
    n.k = e;
    n.val = map(value(a), [e](double v) { return kernels::pow_guarded(v, e); });
    return push(std::move(n));
}

Tape::Id Tape::conv1x1(Id x, Id w, Id b) {
    const Tensor64& xv = value(x);
    const Tensor64& wv = value(w);
    if (wv.channels() != 1 || wv.width() != xv.channels())
        throw std::invalid_argument("conv1x1: weight " + wv.shape_str() +
                                    " does not match input " + xv.shape_str());
    const Tensor64* bv = nullptr;
    if (b != kNone) {
        bv = &value(b);
        if (bv->height() != 1 || bv->width() != 1 || bv->channels() != wv.height())
            throw std::invalid_argument("conv1x1: bias " + bv->shape_str() +
                                        " does not match weight " + wv.shape_str());
    }
    Node n;
    n.op = Op::Conv1x1;
    n.a = x;
    n.b = w;
    n.c = b;
    n.val = conv1x1_fwd(xv, wv, bv);
    return push(std::move(n));
}

Tape::Id Tape::dwconv(Id x, Id w) {
    const Tensor64& xv = value(x);
    const Tensor64& wv = value(w);
    if (wv.height() != wv.width() || wv.height() % 2 == 0)
        throw std::invalid_argument("dwconv: kernel must be square and odd, got " +
                                    wv.shape_str());
    if (wv.channels() != xv.channels())
        throw std::invalid_argument("dwconv: kernel " + wv.shape_str() +
                                    " does not match input " + xv.shape_str());
    Node n;
    n.op = Op::DwConv;
    n.a = x;
    n.b = w;
    n.val = dwconv_fwd(xv, wv);
    return push(std::move(n));
}

Tape::Id Tape::layer_norm(Id x, Id scale, Id shift) {
    const Tensor64& xv = value(x);
    const Tensor64& sv = value(scale);
    const Tensor64& bv = value(shift);
    if (sv.channels() != xv.channels() || bv.channels() != xv.channels() ||
        sv.size() != static_cast<size_t>(sv.channels()) ||
        bv.size() != static_cast<size_t>(bv.channels()))
        throw std::invalid_argument("layer_norm: affine shapes " + sv.shape_str() + "/" +
                                    bv.shape_str() + " do not match input " +
                                    xv.shape_str());
    Node n;
    n.op = Op::LayerNorm;
    n.a = x;
    n.b = scale;
    n.c = shift;
    n.val = layer_norm_fwd(xv, sv, bv);
    return push(std::move(n));
}

Tape::Id Tape::gap(Id x) {
    const Tensor64& xv = value(x);
    Node n;
    n.op = Op::Gap;
    n.a = x;
    Tensor64 out(1, 1, xv.channels());
    const double npix = static_cast<double>(xv.height()) * xv.width();
    for (int y = 0; y < xv.height(); ++y)
        for (int xx = 0; xx < xv.width(); ++xx)
            for (int c = 0; c < xv.channels(); ++c) out.at(0, 0, c) += xv.at(y, xx, c);
    for (int c = 0; c < xv.channels(); ++c) out.at(0, 0, c) /= npix;
    n.val = std::move(out);
    return push(std::move(n));
}

Tape::Id Tape::gaussian11_valid(Id x) {
    Node n;
    n.op = Op::Gauss;
    n.a = x;
    n.val = kernels::gaussian11_valid(value(x));
    return push(std::move(n));
}

Tape::Id Tape::avgpool2(Id x) {
    Node n;
    n.op = Op::AvgPool2;
    n.a = x;
    n.val = kernels::avgpool2(value(x));
    return push(std::move(n));
}

Tape::Id Tape::reduce_mean(Id x) {
    Node n;
    n.op = Op::ReduceMean;
    n.a = x;
    n.val = Tensor64(1, 1, 1);
    n.val[0] = kernels::reduce_mean(value(x));
    return push(std::move(n));
}

Tape::Id Tape::luma_rec709(Id x) {
    Node n;
    n.op = Op::Luma;
    n.a = x;
    n.val = kernels::luma_rec709(value(x));
    return push(std::move(n));
}

void Tape::accumulate(Id target, const Tensor64& g) {
    const Tensor64& tv = nodes_[target].val;
    const Tensor64 r = reduce_to(g, tv.height(), tv.width(), tv.channels());
    Tensor64& slot = grads_[target];
    if (slot.empty()) {
        slot = r;
    } else {
        for (size_t i = 0; i < slot.size(); ++i) slot[i] += r[i];
    }
}

void Tape::backward(Id root) {
    const Tensor64& rv = value(root);
    if (rv.size() != 1)
        throw std::invalid_argument("backward needs a scalar root, got " + rv.shape_str());

    grads_.assign(nodes_.size(), Tensor64());
    grads_[root] = Tensor64(1, 1, 1, 1.0);

    for (Id id = root; id >= 0; --id) {
        const Node& n = nodes_[id];
        const Tensor64& g = grads_[id];
        if (g.empty()) continue;

        switch (n.op) {
            case Op::Input:
            case Op::Param:
                break;
            case Op::Add:
                accumulate(n.a, g);
                accumulate(n.b, g);
                break;
            case Op::Sub:
                accumulate(n.a, g);
                accumulate(n.b, multinex::scale(g, -1.0));
                break;
            case Op::Mul:
                accumulate(n.a, multinex::mul(g, nodes_[n.b].val));
                accumulate(n.b, multinex::mul(g, nodes_[n.a].val));
                break;
            case Op::Div: {
                const Tensor64& av = nodes_[n.a].val;
                const Tensor64& bv = nodes_[n.b].val;
                accumulate(n.a, multinex::div(g, bv));
                const Tensor64 term = broadcast_zip(
                    av, bv, [](double x, double y) { return -x / (y * y); });
                accumulate(n.b, multinex::mul(g, term));
                break;
            }
            case Op::Scale:
                accumulate(n.a, multinex::scale(g, n.k));
                break;
            case Op::Offset:
                accumulate(n.a, g);
                break;
            case Op::Relu:
                accumulate(n.a, broadcast_zip(g, n.val, [](double gg, double v) {
                               return v > 0.0 ? gg : 0.0;
                           }));
                break;
            case Op::Sigmoid:
                accumulate(n.a, broadcast_zip(g, n.val, [](double gg, double v) {
                               return gg * v * (1.0 - v);
                           }));
                break;
            case Op::Tanh:
                accumulate(n.a, broadcast_zip(g, n.val, [](double gg, double v) {
                               return gg * (1.0 - v * v);
                           }));
                break;
            case Op::Pow: {
                const double e = n.k;
                accumulate(n.a, broadcast_zip(g, nodes_[n.a].val, [e](double gg, double x) {
                               return x > 0.0 ? gg * e * std::pow(x, e - 1.0) : 0.0;
                           }));
                break;
            }
            case Op::Conv1x1: {
                const Tensor64& xv = nodes_[n.a].val;
                const Tensor64& wv = nodes_[n.b].val;
                const int cin = wv.width(), cout = wv.height();

                Tensor64 dx(xv.height(), xv.width(), cin);
                for (int y = 0; y < xv.height(); ++y)
                    for (int xx = 0; xx < xv.width(); ++xx) {
                        const double* pg = &g.at(y, xx, 0);
                        double* pdx = &dx.at(y, xx, 0);
                        for (int o = 0; o < cout; ++o) {
                            const double go = pg[o];
                            const double* wr = &wv.at(o, 0, 0);
                            for (int i = 0; i < cin; ++i) pdx[i] += go * wr[i];
                        }
                    }
                accumulate(n.a, dx);

                Tensor64 dw(cout, cin, 1);
                for (int y = 0; y < xv.height(); ++y)
                    for (int xx = 0; xx < xv.width(); ++xx) {
                        const double* pg = &g.at(y, xx, 0);
                        const double* px = &xv.at(y, xx, 0);
                        for (int o = 0; o < cout; ++o) {
                            const double go = pg[o];
                            double* wr = &dw.at(o, 0, 0);
                            for (int i = 0; i < cin; ++i) wr[i] += go * px[i];
                        }
                    }
                accumulate(n.b, dw);

                if (n.c != kNone) {
                    Tensor64 db(1, 1, cout);
                    for (int y = 0; y < xv.height(); ++y)
                        for (int xx = 0; xx < xv.width(); ++xx)
                            for (int o = 0; o < cout; ++o) db.at(0, 0, o) += g.at(y, xx, o);
                    accumulate(n.c, db);
                }
                break;
            }
            case Op::DwConv: {
                const Tensor64& xv = nodes_[n.a].val;
                const Tensor64& wv = nodes_[n.b].val;
                const int k = wv.height(), p = k / 2;
                const int H = xv.height(), W = xv.width(), C = xv.channels();

                // Gather form of the data gradient (no scatter races).
                Tensor64 dx(H, W, C);
                for (int sy = 0; sy < H; ++sy)
                    for (int sx = 0; sx < W; ++sx)
                        for (int c = 0; c < C; ++c) {
                            double acc = 0.0;
                            for (int dy = 0; dy < k; ++dy) {
                                const int oy = sy - dy + p;
                                if (oy < 0 || oy >= H) continue;
                                for (int dx2 = 0; dx2 < k; ++dx2) {
                                    const int ox = sx - dx2 + p;
                                    if (ox < 0 || ox >= W) continue;
                                    acc += wv.at(dy, dx2, c) * g.at(oy, ox, c);
                                }
                            }
                            dx.at(sy, sx, c) = acc;
                        }
                accumulate(n.a, dx);

                Tensor64 dw(k, k, C);
                for (int dy = 0; dy < k; ++dy)
                    for (int dx2 = 0; dx2 < k; ++dx2)
                        for (int c = 0; c < C; ++c) {
                            double acc = 0.0;
                            for (int y = 0; y < H; ++y) {
                                const int sy = y + dy - p;
                                if (sy < 0 || sy >= H) continue;
                                for (int xx = 0; xx < W; ++xx) {
                                    const int sx = xx + dx2 - p;
                                    if (sx < 0 || sx >= W) continue;
                                    acc += g.at(y, xx, c) * xv.at(sy, sx, c);
                                }
                            }
                            dw.at(dy, dx2, c) = acc;
                        }
                accumulate(n.b, dw);
                break;
            }
            case Op::LayerNorm: {
                const Tensor64& xv = nodes_[n.a].val;
                const Tensor64& sv = nodes_[n.b].val;
                const int C = xv.channels();

                Tensor64 dx(xv.height(), xv.width(), C);
                Tensor64 dscale(1, 1, C);
                Tensor64 dshift(1, 1, C);
                std::vector<double> d(C), dxhat(C);
                for (int y = 0; y < xv.height(); ++y)
                    for (int xx = 0; xx < xv.width(); ++xx) {
                        const double* px = &xv.at(y, xx, 0);
                        const double* pg = &g.at(y, xx, 0);
                        double mu = 0.0;
                        for (int c = 0; c < C; ++c) mu += px[c];
                        mu /= C;
                        double var = 0.0;
                        for (int c = 0; c < C; ++c) {
                            d[c] = px[c] - mu;
                            var += d[c] * d[c];
                        }
                        var /= C;
                        const double inv = 1.0 / std::sqrt(var + kLnEps);

                        double dvar = 0.0, dmu_a = 0.0, dsum = 0.0;
                        for (int c = 0; c < C; ++c) {
                            dxhat[c] = pg[c] * sv[c];
                            dscale.at(0, 0, c) += pg[c] * (d[c] * inv);
                            dshift.at(0, 0, c) += pg[c];
                            dvar += dxhat[c] * d[c];
                            dmu_a += dxhat[c];
                            dsum += d[c];
                        }
                        dvar *= -0.5 * inv * inv * inv;
                        const double dmu = -inv * dmu_a + dvar * (-2.0 / C) * dsum;
                        for (int c = 0; c < C; ++c)
                            dx.at(y, xx, c) = dxhat[c] * inv + dvar * 2.0 * d[c] / C + dmu / C;
                    }
                accumulate(n.a, dx);
                accumulate(n.b, dscale);
                accumulate(n.c, dshift);
                break;
            }
            case Op::Gap: {
                const Tensor64& xv = nodes_[n.a].val;
                const double npix = static_cast<double>(xv.height()) * xv.width();
                Tensor64 dx(xv.height(), xv.width(), xv.channels());
                for (int y = 0; y < xv.height(); ++y)
                    for (int xx = 0; xx < xv.width(); ++xx)
                        for (int c = 0; c < xv.channels(); ++c)
                            dx.at(y, xx, c) = g.at(0, 0, c) / npix;
                accumulate(n.a, dx);
                break;
            }
            case Op::Gauss: {
                const Tensor64& xv = nodes_[n.a].val;
                const auto& w = kernels::gaussian11();
                constexpr int K = kernels::kWindow;
                Tensor64 dx(xv.height(), xv.width(), xv.channels());
                for (int y = 0; y < g.height(); ++y)
                    for (int xx = 0; xx < g.width(); ++xx)
                        for (int c = 0; c < g.channels(); ++c) {
                            const double go = g.at(y, xx, c);
                            for (int i = 0; i < K; ++i)
                                for (int j = 0; j < K; ++j)
                                    dx.at(y + i, xx + j, c) += w[i * K + j] * go;
                        }
                accumulate(n.a, dx);
                break;
            }
            case Op::AvgPool2: {
                const Tensor64& xv = nodes_[n.a].val;
                Tensor64 dx(xv.height(), xv.width(), xv.channels());
                for (int y = 0; y < g.height(); ++y)
                    for (int xx = 0; xx < g.width(); ++xx)
                        for (int c = 0; c < g.channels(); ++c) {
                            const double q = g.at(y, xx, c) * 0.25;
                            dx.at(2 * y, 2 * xx, c) += q;
                            dx.at(2 * y, 2 * xx + 1, c) += q;
                            dx.at(2 * y + 1, 2 * xx, c) += q;
                            dx.at(2 * y + 1, 2 * xx + 1, c) += q;
                        }
                accumulate(n.a, dx);
                break;
            }
            case Op::ReduceMean: {
                const Tensor64& xv = nodes_[n.a].val;
                const double q = g[0] / static_cast<double>(xv.size());
                accumulate(n.a, Tensor64(xv.height(), xv.width(), xv.channels(), q));
                break;
            }
            case Op::Luma: {
                const Tensor64& xv = nodes_[n.a].val;
                Tensor64 dx(xv.height(), xv.width(), 3);
                for (int y = 0; y < g.height(); ++y)
                    for (int xx = 0; xx < g.width(); ++xx) {
                        const double go = g.at(y, xx, 0);
                        dx.at(y, xx, 0) = kernels::kLumaR * go;
                        dx.at(y, xx, 1) = kernels::kLumaG * go;
                        dx.at(y, xx, 2) = kernels::kLumaB * go;
                    }
                accumulate(n.a, dx);
                break;
            }
        }
    }
}

Tensor64 Tape::grad(Id id) const {
    const Node& n = node(id);
    if (grads_.size() != nodes_.size() || grads_[id].empty())
        return Tensor64(n.val.height(), n.val.width(), n.val.channels());
    return grads_[id];
}

std::map<std::string, Tensor64> Tape::param_grads() const {
    std::map<std::string, Tensor64> out;
    for (Id id = 0; id < static_cast<Id>(nodes_.size()); ++id)
        if (nodes_[id].op == Op::Param) out[nodes_[id].name] = grad(id);
    return out;
}

} // namespace multinex::tape
