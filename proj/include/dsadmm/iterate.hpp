#pragma once

#include "dsadmm/prox.hpp"

namespace dsadmm {

/// Network-wide iterate w = (u, v, lambda) with lambda = (w1, w2). Every
/// block is agent-major: entries [i*d, (i+1)*d) belong to agent i.
struct GlobalIterate {
    Vector u;
    Vector v;
    Vector w1;
    Vector w2;

    static GlobalIterate zeros(int n, int d) {
        const Eigen::Index nd = static_cast<Eigen::Index>(n) * d;
        return {Vector::Zero(nd), Vector::Zero(nd), Vector::Zero(nd), Vector::Zero(nd)};
    }

    Vector lambda() const {
        Vector out(w1.size() + w2.size());
        out << w1, w2;
        return out;
    }

    Vector stacked() const {
        Vector out(u.size() + v.size() + w1.size() + w2.size());
        out << u, v, w1, w2;
        return out;
    }
};

}  // namespace dsadmm
