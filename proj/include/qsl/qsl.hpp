#pragma once

#include "qsl/errors.hpp"
#include "qsl/linalg.hpp"
#include "qsl/bures.hpp"
#include "qsl/numerics.hpp"
#include "qsl/gksl.hpp"
#include "qsl/jc_unitary.hpp"
#include "qsl/jc_dispersive.hpp"
#include "qsl/config.hpp"
#include "qsl/verify.hpp"
#include "qsl/scenario.hpp"
