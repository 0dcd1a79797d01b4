#include "c2f/fusion.hpp"

#include <stdexcept>

namespace c2f {

Mask3D majority_vote(const ViewPredictions& views) {
    const Mask3D* masks[3] = {&views.coronal, &views.sagittal, &views.axial};
    for (const Mask3D* m : masks) {
        if (m->mode() != MaskMode::Binary) {
            throw std::invalid_argument("majority_vote needs binary masks");
        }
        if (m->dims() != views.coronal.dims()) {
            throw std::invalid_argument(
                "majority_vote: view dims differ, " +
                views.coronal.dims().to_string() + " vs " +
                m->dims().to_string());
        }
    }
    std::vector<float> out(views.coronal.data().size());
    auto a = views.coronal.data();
    auto b = views.sagittal.data();
    auto c = views.axial.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (a[i] + b[i] + c[i] >= 2.0f) ? 1.0f : 0.0f;
    }
    return Mask3D(views.coronal.dims(), MaskMode::Binary, std::move(out));
}

} // namespace c2f
