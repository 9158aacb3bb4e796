#pragma once

#include "branelab/brane.hpp"
#include "branelab/distribution.hpp"
#include "branelab/errors.hpp"
#include "branelab/field_matrix.hpp"
#include "branelab/field_text.hpp"
#include "branelab/form.hpp"
#include "branelab/linalg.hpp"
#include "branelab/model.hpp"
#include "branelab/nearby.hpp"
#include "branelab/infdef.hpp"
#include "branelab/sampling.hpp"
#include "branelab/scalar_field.hpp"
#include "branelab/vector_field.hpp"
#include "branelab/verdict.hpp"
