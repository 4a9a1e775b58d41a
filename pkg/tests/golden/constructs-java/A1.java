public final class A1 extends A0<String> {
    @Override
    public String func(String arg0) {
        return null;
    }
    @Override
    public Object func3() {
        return null;
    }
}
