#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ruinlab/laws.hpp"
#include "ruinlab/rng.hpp"
#include "ruinlab/vec.hpp"

namespace ruinlab {

// Marsaglia-Tsang gamma variate with unit scale.  Building block of the
// Dirichlet sampler below; also used for gamma interarrival times.
double gamma_sample(RngStream& rng, double alpha);

// Measure on the L1 unit simplex { theta >= 0, sum theta = 1 } describing
// where mass escapes to infinity.  Either a finite list of weighted atoms or
// a Dirichlet density (uniform = all concentration parameters 1).  Atom
// weights may sum to anything positive: normalization is the caller's
// convention (sampling always normalizes).
struct AngularMeasure {
    enum class Kind { kAtoms, kDirichlet };
    Kind kind = Kind::kAtoms;
    int dim = 0;
    std::vector<std::pair<Vec, double>> atoms;  // (simplex point, weight > 0)
    Vec dirichlet_alpha;                        // concentration parameters > 0

    static AngularMeasure single_atom(Vec theta);
    static AngularMeasure atom_list(std::vector<std::pair<Vec, double>> atoms);
    static AngularMeasure dirichlet(Vec alpha);
    static AngularMeasure uniform(int dim);

    double total_mass() const;  // atom weight sum; 1 for densities
    Vec sample(RngStream& rng) const;
    std::optional<std::string> validate() const;
    void validate_or_throw() const;
};

// Regular-variation summary of a claim vector: tail index, spectral measure
// on the simplex (mass 1 by convention here), and the law of the L1 norm
// whose survival supplies the u * P(|X| > u) scaling.
struct MrvDescriptor {
    double alpha = 0.0;
    AngularMeasure spectral;
    LawPtr norm_law;
};

}  // namespace ruinlab
