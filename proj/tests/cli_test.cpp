// placeholder — suite lands with its module
