#pragma once

#include "caplab/capmesh_io.hpp"
#include "caplab/classify.hpp"
#include "caplab/curvature.hpp"
#include "caplab/eigensolver.hpp"
#include "caplab/error.hpp"
#include "caplab/families.hpp"
#include "caplab/fields.hpp"
#include "caplab/identities.hpp"
#include "caplab/mesh.hpp"
#include "caplab/operators.hpp"
#include "caplab/serialize.hpp"
#include "caplab/stability.hpp"
#include "caplab/types.hpp"
#include "caplab/wedge.hpp"
