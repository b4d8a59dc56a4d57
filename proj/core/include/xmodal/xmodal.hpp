#ifndef XMODAL_XMODAL_HPP
#define XMODAL_XMODAL_HPP

#include "xmodal/coefficients.hpp"
#include "xmodal/data.hpp"
#include "xmodal/errors.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/gradcheck.hpp"
#include "xmodal/loss.hpp"
#include "xmodal/matrix.hpp"
#include "xmodal/mining.hpp"
#include "xmodal/model.hpp"
#include "xmodal/model_io.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/similarity.hpp"
#include "xmodal/train.hpp"

#endif  // XMODAL_XMODAL_HPP
