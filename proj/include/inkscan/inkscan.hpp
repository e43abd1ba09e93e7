#ifndef INKSCAN_INKSCAN_HPP
#define INKSCAN_INKSCAN_HPP

#include "inkscan/binarize.hpp"
#include "inkscan/cube.hpp"
#include "inkscan/error.hpp"
#include "inkscan/image.hpp"
#include "inkscan/kmeans.hpp"
#include "inkscan/matrix.hpp"
#include "inkscan/netpbm.hpp"
#include "inkscan/pipeline.hpp"
#include "inkscan/rng.hpp"
#include "inkscan/segment.hpp"
#include "inkscan/synth.hpp"

#endif  // INKSCAN_INKSCAN_HPP
