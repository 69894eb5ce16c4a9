#include "multinex/guidance.hpp"

#include <functional>
#include <map>

#include "multinex/image_io.hpp"

namespace multinex::guidance {
namespace {

using ChannelFn = float (*)(float, float, float);

Tensor build_stack(const Tensor& rgb, const std::vector<ChannelFn>& fns) {
    if (rgb.channels() != 3)
        throw std::invalid_argument("guidance stacks need an RGB input, got " +
                                    rgb.shape_str());
    Tensor out(rgb.height(), rgb.width(), static_cast<int>(fns.size()));
    for (int y = 0; y < rgb.height(); ++y)
        for (int x = 0; x < rgb.width(); ++x) {
            const float r = rgb.at(y, x, 0), g = rgb.at(y, x, 1), b = rgb.at(y, x, 2);
            for (size_t k = 0; k < fns.size(); ++k)
                out.at(y, x, static_cast<int>(k)) = fns[k](r, g, b);
        }
    return out;
}

const std::map<std::string, ChannelFn>& registry() {
    static const std::map<std::string, ChannelFn> reg = {
        {"y_rec709", y_rec709},     {"y_vmax", y_vmax},
        {"y_lightness", y_lightness}, {"y_l2", y_l2},
        {"y_mean", y_mean},         {"y_ycgco", y_ycgco},
        {"cb", chroma_cb},          {"cr", chroma_cr},
        {"r_norm", r_norm},         {"g_norm", g_norm},
        {"saturation", saturation}, {"u", chroma_u},
        {"v", chroma_v},            {"o1", opponent_o1},
        {"o2", opponent_o2},
    };
    return reg;
}

} // namespace

Tensor luminance_stack(const Tensor& rgb) {
    return build_stack(rgb, {y_rec709, y_vmax, y_lightness, y_l2});
}

Tensor reflectance_stack(const Tensor& rgb) {
    return build_stack(rgb, {chroma_cb, chroma_cr, r_norm, g_norm, saturation});
}

Tensor extended_stack(const Tensor& rgb) {
    return build_stack(rgb, {chroma_u, chroma_v, opponent_o1, opponent_o2, y_mean, y_ycgco});
}

std::vector<std::string> luminance_names() {
    return {"y_rec709", "y_vmax", "y_lightness", "y_l2"};
}

std::vector<std::string> reflectance_names() {
    return {"cb", "cr", "r_norm", "g_norm", "saturation"};
}

std::vector<std::string> extended_names() {
    return {"u", "v", "o1", "o2", "y_mean", "y_ycgco"};
}

Tensor named_descriptor(const Tensor& rgb, const std::string& name) {
    const auto it = registry().find(name);
    if (it == registry().end())
        throw std::invalid_argument("unknown descriptor '" + name + "'");
    return build_stack(rgb, {it->second});
}

std::vector<std::string> luminance_candidates() {
    return {"y_rec709", "y_mean", "y_ycgco", "y_vmax", "y_lightness", "y_l2"};
}

void dump_stack(const Tensor& stack, const std::vector<std::string>& names,
                const std::string& dir) {
    if (static_cast<int>(names.size()) != stack.channels())
        throw std::invalid_argument("dump_stack: " + std::to_string(names.size()) +
                                    " names for " + std::to_string(stack.channels()) +
                                    " channels");
    for (size_t k = 0; k < names.size(); ++k)
        save_image(dir + "/" + names[k] + ".png",
                   slice_channel(stack, static_cast<int>(k)));
}

} // namespace multinex::guidance
